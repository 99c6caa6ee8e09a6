#include "xdr/diffusion/toy_backend.hpp"

#include "xdr/core/errors.hpp"
#include "xdr/core/rng.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

namespace xdr::diffusion {
namespace {

Matrix orthonormal_columns(int rows, int cols, Rng& rng) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) m.row(i) = standard_normal(rng, cols).transpose();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
  return q;
}

double check_alpha(const NoiseSchedule& s, int t) {
  const double ab = s.alpha_bar_at(t);
  if (!(ab < 1.0)) throw BackendError("toy denoiser is undefined at a noise-free timestep");
  return ab;
}

}  // namespace

ToyLinearBackend::ToyLinearBackend(const ToyBackendOptions& o, std::uint64_t seed) : options_(o), seed_(seed) {
  if (o.object_dim < 1 || o.style_dim < 1) throw ValidationError("toy backend dims must be >= 1");
  const int joint = o.object_dim + o.style_dim;
  if (o.latent_dim < joint) throw ValidationError("toy latent_dim must be >= object_dim + style_dim");
  const int pixels = o.image_height * o.image_width * o.image_channels;
  if (pixels < joint) throw ValidationError("toy images need at least object_dim + style_dim pixels");
  Rng rng(seed);
  const Matrix q = orthonormal_columns(o.latent_dim, joint, rng);
  a_ = q.leftCols(o.object_dim);
  b_ = q.rightCols(o.style_dim);
  g_.resize(o.style_dim, o.object_dim);
  for (int i = 0; i < o.style_dim; ++i) g_.row(i) = standard_normal(rng, o.object_dim).transpose();
  g_ *= o.style_gain / std::sqrt(static_cast<double>(o.object_dim));
  render_ = orthonormal_columns(pixels, joint, rng);
  render_scale_ = 0.45 / o.render_radius;
}

Vector ToyLinearBackend::prompt_style(const PromptEmbedding& prompt) const { return g_ * prompt.style_token_sum(); }

Vector ToyLinearBackend::latent_of(const Vector& object, const Vector& style) const {
  return a_ * object + b_ * style;
}

double ToyLinearBackend::render_extent(const Vector& object, const Vector& style) const {
  Vector joint(object.size() + style.size());
  joint << object, style;
  return (render_ * joint).cwiseAbs().maxCoeff();
}

Image ToyLinearBackend::render(const Vector& object, const Vector& style) const {
  if (object.size() != options_.object_dim || style.size() != options_.style_dim) {
    throw ValidationError("toy render: wrong object/style dimension");
  }
  Vector joint(object.size() + style.size());
  joint << object, style;
  const Vector px = (render_ * joint).array() * render_scale_ + 0.5;
  if (px.minCoeff() < 0.0 || px.maxCoeff() > 1.0) throw ValidationError("toy render left [0, 1]; raise render_radius");
  Image img(options_.image_height, options_.image_width, options_.image_channels);
  for (Eigen::Index i = 0; i < px.size(); ++i) img.pixels[i] = px[i];
  return img;
}

Vector ToyLinearBackend::encode_to_latent(const Image& image) const {
  if (static_cast<Eigen::Index>(image.size()) != render_.rows()) {
    throw ValidationError("toy backend expects " + std::to_string(render_.rows()) + " pixels, got " +
                          std::to_string(image.size()));
  }
  const Vector px = Eigen::Map<const Vector>(image.pixels.data(), render_.rows());
  const Vector joint = render_.transpose() * ((px.array() - 0.5) / render_scale_).matrix();
  return a_ * joint.head(options_.object_dim) + b_ * joint.tail(options_.style_dim);
}

Vector ToyLinearBackend::predict_noise(const Vector& x_t, const PromptEmbedding& prompt, int t) const {
  if (x_t.size() != options_.latent_dim) throw ValidationError("toy backend: latent size mismatch");
  if (prompt.tokens.cols() != options_.object_dim) throw ValidationError("toy backend: prompt token size mismatch");
  const double ab = check_alpha(options_.schedule, t);
  const Vector mean = a_ * prompt.object_token() + b_ * prompt_style(prompt);
  return (x_t - std::sqrt(ab) * mean) / std::sqrt(1.0 - ab);
}

Vector ToyLinearBackend::predict_noise_object_vjp(const Vector& x_t, const PromptEmbedding& prompt, int t,
                                                  const Vector& upstream) const {
  if (upstream.size() != options_.latent_dim) throw ValidationError("toy backend: upstream size mismatch");
  const double ab = check_alpha(options_.schedule, t);
  return -std::sqrt(ab / (1.0 - ab)) * (a_.transpose() * upstream);
}

std::vector<double> ToyLinearBackend::parameter_snapshot() const {
  std::vector<double> out;
  for (const Matrix* m : {&a_, &b_, &g_, &render_}) out.insert(out.end(), m->data(), m->data() + m->size());
  out.push_back(render_scale_);
  out.insert(out.end(), options_.schedule.alpha_bar.begin(), options_.schedule.alpha_bar.end());
  return out;
}

void ToyLinearBackend::save(const std::filesystem::path& json_path) const {
  auto bin_path = json_path;
  bin_path.replace_extension(".bin");
  nlohmann::json doc;
  doc["format"] = "xdr-toy-backend";
  doc["version"] = 1;
  doc["seed"] = seed_;
  doc["options"] = {{"object_dim", options_.object_dim},
                    {"style_dim", options_.style_dim},
                    {"latent_dim", options_.latent_dim},
                    {"image_height", options_.image_height},
                    {"image_width", options_.image_width},
                    {"image_channels", options_.image_channels},
                    {"style_gain", options_.style_gain},
                    {"render_radius", options_.render_radius}};
  doc["schedule"] = {{"kind", beta_ramp_name(options_.schedule.kind)},
                     {"steps", options_.schedule.steps()},
                     {"beta_start", options_.schedule.beta_start},
                     {"beta_end", options_.schedule.beta_end}};
  doc["render_scale"] = render_scale_;
  doc["binary"] = bin_path.filename().string();
  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) throw IoError("cannot write '" + bin_path.string() + "'");
  nlohmann::json arrays = nlohmann::json::array();
  std::size_t offset = 0;
  auto put = [&](const char* name, const Matrix& m) {
    arrays.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}, {"offset", offset}});
    bin.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
    offset += static_cast<std::size_t>(m.size()) * sizeof(double);
  };
  put("A", a_);
  put("B", b_);
  put("G", g_);
  put("R", render_);
  doc["arrays"] = arrays;
  std::ofstream js(json_path);
  if (!js) throw IoError("cannot write '" + json_path.string() + "'");
  js << doc.dump(2) << '\n';
}

ToyLinearBackend ToyLinearBackend::load(const std::filesystem::path& json_path) {
  std::ifstream js(json_path);
  if (!js) throw IoError("cannot open '" + json_path.string() + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(js);
  } catch (const nlohmann::json::exception& e) {
    throw CorruptArtifact("toy backend header: " + std::string(e.what()));
  }
  if (doc.value("format", "") != "xdr-toy-backend" || doc.value("version", 0) != 1) {
    throw CorruptArtifact("'" + json_path.string() + "' is not a toy backend header");
  }
  ToyLinearBackend b;
  try {
    const auto& o = doc.at("options");
    b.options_.object_dim = o.at("object_dim");
    b.options_.style_dim = o.at("style_dim");
    b.options_.latent_dim = o.at("latent_dim");
    b.options_.image_height = o.at("image_height");
    b.options_.image_width = o.at("image_width");
    b.options_.image_channels = o.at("image_channels");
    b.options_.style_gain = o.at("style_gain");
    b.options_.render_radius = o.at("render_radius");
    const auto& s = doc.at("schedule");
    b.options_.schedule = build_noise_schedule(s.at("steps"), parse_beta_ramp(s.at("kind")), s.at("beta_start"),
                                               s.at("beta_end"));
    b.seed_ = doc.at("seed");
    b.render_scale_ = doc.at("render_scale");
    const auto bin_path = json_path.parent_path() / doc.at("binary").get<std::string>();
    std::ifstream bin(bin_path, std::ios::binary);
    if (!bin) throw IoError("cannot open '" + bin_path.string() + "'");
    for (const auto& arr : doc.at("arrays")) {
      Matrix m(arr.at("rows").get<Eigen::Index>(), arr.at("cols").get<Eigen::Index>());
      bin.seekg(arr.at("offset").get<std::streamoff>());
      bin.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
      if (!bin) throw CorruptArtifact("toy backend sidecar is truncated");
      const auto name = arr.at("name").get<std::string>();
      if (name == "A") b.a_ = m;
      else if (name == "B") b.b_ = m;
      else if (name == "G") b.g_ = m;
      else if (name == "R") b.render_ = m;
    }
  } catch (const nlohmann::json::exception& e) {
    throw CorruptArtifact("toy backend header: " + std::string(e.what()));
  }
  return b;
}

}  // namespace xdr::diffusion
