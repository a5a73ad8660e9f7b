#include "facedit/local_module.hpp"

#include "facedit/errors.hpp"
#include "facedit/hashing.hpp"

namespace facedit {

namespace {

torch::Tensor batched(const torch::Tensor& x) { return x.dim() == 3 ? x.unsqueeze(0) : x; }

void check_window(const torch::Tensor& x, const Window& w, std::int64_t channels,
                  Component c) {
  if (x.size(1) != channels || x.size(2) != w.h || x.size(3) != w.w) {
    throw ShapeError(std::string(component_name(c)) + " expects " + std::to_string(channels) +
                     " x " + std::to_string(w.h) + " x " + std::to_string(w.w) + " crops");
  }
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::string_view> tags,
                          std::int64_t counter) {
  Fnv1a h;
  h.update_value(seed);
  for (auto t : tags) {
    h.update(t);
    h.update(std::string_view("\x1f", 1));
  }
  h.update_value(counter);
  return h.digest();
}

GeometryEncoderOptions sketch_encoder_options(const RunConfig& cfg) {
  return {1, cfg.net.encoder_base, cfg.net.down_stages, cfg.net.geometry_channels};
}

GeometryEncoderOptions image_encoder_options(const RunConfig& cfg) {
  return {3, cfg.net.encoder_base, cfg.net.down_stages, cfg.net.geometry_channels};
}

SketchDecoderOptions sketch_decoder_options(const RunConfig& cfg) {
  return {cfg.net.geometry_channels, cfg.net.sketch_decoder_res_blocks, cfg.net.down_stages, 1};
}

AppearanceEncoderOptions appearance_encoder_options(const RunConfig& cfg) {
  return {cfg.net.appearance_base, cfg.net.down_stages, cfg.net.appearance_channels};
}

SynthesisGeneratorOptions generator_options(const RunConfig& cfg) {
  return {cfg.net.geometry_channels, cfg.net.appearance_channels, cfg.net.generator_res_blocks,
          cfg.net.generator_up_channels, 3};
}

DiscriminatorOptions discriminator_options(const RunConfig& cfg) {
  return {3, cfg.net.disc_base, cfg.net.disc_scales, cfg.net.disc_down_layers, true};
}

LocalModule make_local_module(const RunConfig& cfg, Component component) {
  LocalModule m;
  m.component = component;
  m.window = cfg.layout().window(component);
  const auto name = component_name(component);
  auto seeded = [&](std::string_view part) {
    torch::manual_seed(derive_seed(cfg.seed, {"init", name, part}));
  };
  seeded("sketch_encoder");
  m.sketch_encoder = GeometryEncoder(sketch_encoder_options(cfg));
  seeded("sketch_decoder");
  m.sketch_decoder = SketchDecoder(sketch_decoder_options(cfg));
  seeded("image_encoder");
  m.image_encoder = GeometryEncoder(image_encoder_options(cfg));
  seeded("appearance_encoder");
  m.appearance_encoder = AppearanceEncoder(appearance_encoder_options(cfg));
  seeded("generator");
  m.generator = SynthesisGenerator(generator_options(cfg));
  seeded("discriminator");
  m.discriminator = MultiScaleDiscriminator(discriminator_options(cfg));
  return m;
}

std::pair<int, int> LocalModule::latent_size() const {
  const int stride = sketch_encoder->options().down_stages;
  return {window.h >> stride, window.w >> stride};
}

GeometryFeature LocalModule::encode_sketch(const torch::Tensor& sketch_crop) {
  const auto x = batched(sketch_crop);
  check_window(x, window, 1, component);
  return {sketch_encoder->forward(x), GeometrySource::kSketch, component};
}

GeometryFeature LocalModule::encode_image_geometry(const torch::Tensor& image_crop) {
  const auto x = batched(image_crop);
  check_window(x, window, 3, component);
  return {image_encoder->forward(x), GeometrySource::kImage, component};
}

AppearanceFeature LocalModule::encode_appearance(const torch::Tensor& image_crop) {
  const auto x = batched(image_crop);
  check_window(x, window, 3, component);
  return {appearance_encoder->forward(x), component};
}

torch::Tensor LocalModule::embed(const GeometryFeature& g, const AppearanceFeature& a) {
  if (g.component != component || a.component != component) {
    throw InvalidInput(std::string(component_name(component)) +
                       " module received a code from another component");
  }
  const auto [h, w] = latent_size();
  if (g.data.dim() != 4 || g.data.size(2) != h || g.data.size(3) != w) {
    throw ShapeError(std::string(component_name(component)) + " expects " + std::to_string(h) +
                     " x " + std::to_string(w) + " geometry latents");
  }
  return generator->embed(g.data, a.data);
}

torch::Tensor LocalModule::synthesize(const GeometryFeature& g, const AppearanceFeature& a) {
  return generator->to_rgb(embed(g, a));
}

void LocalModule::eval() {
  for (torch::nn::Module* m :
       std::initializer_list<torch::nn::Module*>{sketch_encoder.get(), sketch_decoder.get(),
                                                 image_encoder.get(), appearance_encoder.get(),
                                                 generator.get(), discriminator.get()}) {
    m->eval();
  }
}

void LocalModule::train() {
  for (torch::nn::Module* m :
       std::initializer_list<torch::nn::Module*>{sketch_encoder.get(), sketch_decoder.get(),
                                                 image_encoder.get(), appearance_encoder.get(),
                                                 generator.get(), discriminator.get()}) {
    m->train();
  }
}

}  // namespace facedit
