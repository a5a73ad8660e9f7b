#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <csignal>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "facedit/raster.hpp"
#include "facedit/sketch.hpp"
#include "facedit/synthetic_faces.hpp"
#include "support.hpp"

namespace facedit {
namespace {

using testing::TempDir;

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(FACEDIT_BIN) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (const auto n = fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

TEST(Cli, UsageErrorsExitWithOne) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("bogus").code, 1);
  EXPECT_EQ(run("train warp --data x --out y").code, 1);
  EXPECT_EQ(run("--version").code, 0);
}

TEST(Cli, EmptyImageDirectoryIsADataError) {
  TempDir dir("cli-empty");
  std::filesystem::create_directories(dir / "images");
  const auto r = run("dataset --images " + (dir / "images").string() + " --out " + (dir / "ds").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("no images"), std::string::npos) << r.out;
}

TEST(Cli, StageOrderIsEnforced) {
  TempDir dir("cli-order");
  const auto r = run("train ld --data " + (dir / "ds").string() + " --out " + (dir / "run").string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("requires a finished"), std::string::npos) << r.out;
}

TEST(Cli, SyntheticDatasetIsReproducibleForASeed) {
  TempDir dir("cli-seed");
  for (const char* name : {"a", "b"}) {
    ASSERT_EQ(run("dataset --synthetic 12 --seed 11 --out " + (dir / name).string()).code, 0);
  }
  const auto a = slurp(dir / "a" / "manifest.jsonl");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(dir / "b" / "manifest.jsonl"));
  EXPECT_EQ(slurp(dir / "a" / "sketches" / "face_00003.png"), slurp(dir / "b" / "sketches" / "face_00003.png"));
}

TEST(Cli, ConfigDumpRoundTrips) {
  TempDir dir("cli-config");
  const auto first = run("config --seed 5");
  ASSERT_EQ(first.code, 0);
  std::ofstream(dir / "c.yaml") << first.out;
  const auto second = run("config --config " + (dir / "c.yaml").string());
  EXPECT_EQ(second.code, 0);
  EXPECT_EQ(first.out, second.out);
}

class CliWithBundle : public ::testing::Test {
 protected:
  void SetUp() override {
    testing::fresh_engine(testing::tiny_config())->save(dir_ / "bundle");
    write_png(dir_ / "a.png", face_a_);
    write_png(dir_ / "b.png", mat_to_tensor(render_synthetic_face(2, 1)));
    write_png(dir_ / "s.png", extract_sketch(face_a_));
  }

  TempDir dir_{"cli-bundle"};
  torch::Tensor face_a_ = mat_to_tensor(render_synthetic_face(2, 0));
};

TEST_F(CliWithBundle, GenerateWritesModelResolutionPng) {
  const auto out = dir_ / "out.png";
  const auto r = run("generate --bundle " + (dir_ / "bundle").string() + " --sketch " +
                     (dir_ / "s.png").string() + " --appearance " + (dir_ / "b.png").string() +
                     " --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(read_png(out, 3).sizes(), (std::vector<std::int64_t>{3, 128, 128}));

  EXPECT_EQ(run("generate --bundle " + (dir_ / "bundle").string() + " --appearance " +
                (dir_ / "b.png").string() + " --out " + out.string())
                .code,
            1);
  EXPECT_EQ(run("generate --bundle " + (dir_ / "missing").string() + " --sketch " +
                (dir_ / "s.png").string() + " --appearance " + (dir_ / "b.png").string() +
                " --out " + out.string())
                .code,
            2);
}

TEST_F(CliWithBundle, MorphGridTilesCells) {
  const auto out = dir_ / "grid.png";
  const auto r = run("morph --bundle " + (dir_ / "bundle").string() + " --a " + (dir_ / "a.png").string() +
                     " --b " + (dir_ / "b.png").string() + " --grid 2 3 --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(read_png(out, 3).sizes(), (std::vector<std::int64_t>{3, 256, 384}));
  EXPECT_EQ(run("morph --bundle " + (dir_ / "bundle").string() + " --a " + (dir_ / "a.png").string() +
                " --b " + (dir_ / "b.png").string() + " --t-geom 1.5 --out " + out.string())
                .code,
            1);
}

TEST_F(CliWithBundle, ServeAnswersUntilTerminated) {
  std::filesystem::create_directories(dir_ / "gallery");
  write_png(dir_ / "gallery" / "ref.png", face_a_);
  int fds[2];
  ASSERT_EQ(pipe(fds), 0);
  const pid_t pid = fork();
  ASSERT_GE(pid, 0);
  if (pid == 0) {
    dup2(fds[1], STDOUT_FILENO);
    close(fds[0]);
    const auto bundle = (dir_ / "bundle").string();
    const auto gallery = (dir_ / "gallery").string();
    execl(FACEDIT_BIN, FACEDIT_BIN, "serve", "--bundle", bundle.c_str(), "--gallery", gallery.c_str(),
          "--port", "0", "--stream-port", "0", "--log-level", "warn", static_cast<char*>(nullptr));
    _exit(127);
  }
  close(fds[1]);
  FILE* out = fdopen(fds[0], "r");
  int http_port = 0;
  int stream_port = 0;
  ASSERT_EQ(fscanf(out, "http %d stream %d", &http_port, &stream_port), 2);
  fclose(out);

  httplib::Client client("127.0.0.1", http_port);
  const auto list = client.Get("/appearances");
  ASSERT_TRUE(list);
  EXPECT_EQ(nlohmann::json::parse(list->body)[0]["id"], "ref");
  const auto health = client.Get("/healthz");
  ASSERT_TRUE(health);
  EXPECT_EQ(nlohmann::json::parse(health->body)["model"], true);

  kill(pid, SIGTERM);
  int status = 0;
  waitpid(pid, &status, 0);
  EXPECT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 0);
}

}  // namespace
}  // namespace facedit
