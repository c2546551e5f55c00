/*
 * Copyright 2026 The HFSS Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "hfss/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <utility>

#include <nlohmann/json.hpp>

#include "hfss/container.hpp"
#include "hfss/error.hpp"
#include "hfss/random.hpp"
#include "hfss/remote.hpp"

namespace hfss {
namespace {

using nlohmann::json;

constexpr std::string_view kSpectralMagic = "HFSS-SPECTRAL-LINEAR 1";
constexpr std::string_view kReferenceMagic = "HFSS-REFERENCE-LINEAR 1";

void require_label(const ImageTensor& image, int classes) {
  if (!image.label()) throw DataError("image has no label");
  const int label = *image.label();
  if (label < 0 || label >= classes) {
    throw DataError("label " + std::to_string(label) + " outside [0, " + std::to_string(classes) +
                    ")");
  }
}

template <typename T>
std::string pack(const std::vector<T>& values) {
  std::string out(values.size() * sizeof(T), '\0');
  std::memcpy(out.data(), values.data(), out.size());
  return out;
}

template <typename T>
std::vector<T> unpack(std::string_view bytes, std::size_t count) {
  if (bytes.size() != count * sizeof(T)) {
    throw IoError("classifier body has " + std::to_string(bytes.size()) + " bytes, expected " +
                  std::to_string(count * sizeof(T)));
  }
  std::vector<T> values(count);
  std::memcpy(values.data(), bytes.data(), bytes.size());
  return values;
}

json shape_json(const ImageShape& s) {
  return {{"channels", s.channels}, {"height", s.height}, {"width", s.width}};
}

ImageShape shape_from(const json& j) {
  return {j.at("channels").get<int>(), j.at("height").get<int>(), j.at("width").get<int>()};
}

}  // namespace

std::vector<double> magnitude_features(const ImageTensor& image) {
  const auto spectra = forward_spectrum(image);
  std::vector<double> features(image.shape().plane_size(), 0.0);
  for (const auto& s : spectra) {
    auto bins = s.bins();
    for (std::size_t i = 0; i < features.size(); ++i) features[i] += std::abs(bins[i]);
  }
  const double inv = 1.0 / static_cast<double>(spectra.size());
  for (double& f : features) f *= inv;
  return features;
}

SpectralLinearClassifier::SpectralLinearClassifier(ImageShape shape, int classes,
                                                   std::vector<double> weights,
                                                   std::vector<double> bias)
    : shape_(shape), classes_(classes), weights_(std::move(weights)), bias_(std::move(bias)) {
  validate_shape(shape_);
  if (classes_ < 1) throw ConfigError("classifier needs at least one class");
  if (weights_.size() != static_cast<std::size_t>(classes_) * shape_.plane_size() ||
      bias_.size() != static_cast<std::size_t>(classes_)) {
    throw ConfigError("spectral classifier weights/bias do not match " +
                      std::to_string(classes_) + " classes over " + shape_.to_string());
  }
}

SpectralLinearClassifier SpectralLinearClassifier::evidence_detector(
    std::span<const FrequencyMask> bands, std::span<const ImageTensor> training,
    std::span<const double> required_fraction, double gain) {
  if (bands.empty()) throw ConfigError("evidence detector needs at least one band");
  if (required_fraction.size() != bands.size()) {
    throw ConfigError("one required fraction per band expected");
  }
  if (training.empty()) throw ConfigError("evidence detector needs training images");
  const ImageShape shape = training.front().shape();
  const int classes = static_cast<int>(bands.size());
  const std::size_t plane = shape.plane_size();

  std::vector<double> reference(bands.size(), 0.0);
  std::vector<std::size_t> seen(bands.size(), 0);
  for (const auto& image : training) {
    require_label(image, classes);
    const int c = *image.label();
    const auto features = magnitude_features(image);
    const auto bits = bands[c].bits();
    double sum = 0.0;
    for (std::size_t i = 0; i < plane; ++i) {
      if (bits[i]) sum += features[i];
    }
    reference[c] += sum / static_cast<double>(bands[c].count());
    ++seen[c];
  }

  std::vector<double> weights(static_cast<std::size_t>(classes) * plane, 0.0);
  std::vector<double> bias(bands.size());
  for (int c = 0; c < classes; ++c) {
    if (seen[c] == 0) throw DataError("no training images for class " + std::to_string(c));
    if (bands[c].height() != shape.height || bands[c].width() != shape.width) {
      throw ConfigError("band mask does not match the training image size");
    }
    const double ref = reference[c] / static_cast<double>(seen[c]);
    const double n = static_cast<double>(bands[c].count());
    if (n == 0 || !(ref > 0.0)) throw DataError("class " + std::to_string(c) + " has no evidence");
    const auto bits = bands[c].bits();
    for (std::size_t i = 0; i < plane; ++i) {
      if (bits[i]) weights[c * plane + i] = gain / (n * ref);
    }
    bias[c] = -gain * required_fraction[c];
  }
  return SpectralLinearClassifier(shape, classes, std::move(weights), std::move(bias));
}

Logits SpectralLinearClassifier::predict(std::span<const ImageTensor> batch) const {
  Logits logits(batch.size(), static_cast<std::size_t>(classes_));
  const std::size_t plane = shape_.plane_size();
  for (std::size_t r = 0; r < batch.size(); ++r) {
    const auto features = magnitude_features(batch[r]);
    for (int c = 0; c < classes_; ++c) {
      const double* w = weights_.data() + c * plane;
      double z = bias_[c];
      for (std::size_t i = 0; i < plane; ++i) z += w[i] * features[i];
      logits.at(r, c) = z;
    }
  }
  return logits;
}

ReferenceLinearModel::ReferenceLinearModel(ImageShape shape, int classes,
                                           std::vector<float> weights, std::vector<float> bias)
    : shape_(shape), classes_(classes), weights_(std::move(weights)), bias_(std::move(bias)) {
  validate_shape(shape_);
  if (classes_ < 1) throw ConfigError("classifier needs at least one class");
  if (weights_.size() != static_cast<std::size_t>(classes_) * shape_.size() ||
      bias_.size() != static_cast<std::size_t>(classes_)) {
    throw ConfigError("reference model weights/bias do not match its shape");
  }
}

ReferenceLinearModel ReferenceLinearModel::identity(ImageShape shape, int classes) {
  if (static_cast<std::size_t>(classes) > shape.size()) {
    throw ConfigError("identity reference model needs classes <= input size");
  }
  std::vector<float> w(static_cast<std::size_t>(classes) * shape.size(), 0.0f);
  for (int k = 0; k < classes; ++k) w[k * shape.size() + k] = 1.0f;
  return ReferenceLinearModel(shape, classes, std::move(w),
                              std::vector<float>(static_cast<std::size_t>(classes), 0.0f));
}

ReferenceLinearModel ReferenceLinearModel::random(ImageShape shape, int classes,
                                                  std::uint64_t seed, float scale) {
  RandomStream rng(seed);
  std::vector<float> w(static_cast<std::size_t>(classes) * shape.size());
  for (float& v : w) v = static_cast<float>(rng.uniform(-scale, scale));
  std::vector<float> b(static_cast<std::size_t>(classes));
  for (float& v : b) v = static_cast<float>(rng.uniform(-scale, scale));
  return ReferenceLinearModel(shape, classes, std::move(w), std::move(b));
}

std::vector<float> ReferenceLinearModel::predict_raw(std::span<const float> tensor,
                                                     std::size_t batch) const {
  const std::size_t d = shape_.size();
  if (tensor.size() != batch * d) throw ConfigError("reference model input size mismatch");
  std::vector<float> out(batch * static_cast<std::size_t>(classes_));
  for (std::size_t b = 0; b < batch; ++b) {
    const float* x = tensor.data() + b * d;
    for (int k = 0; k < classes_; ++k) {
      const float* w = weights_.data() + k * d;
      float acc = bias_[k];
      for (std::size_t i = 0; i < d; ++i) acc += w[i] * x[i];
      out[b * classes_ + k] = acc;
    }
  }
  return out;
}

Logits ReferenceLinearModel::predict(std::span<const ImageTensor> batch) const {
  std::vector<float> tensor;
  tensor.reserve(batch.size() * shape_.size());
  for (const auto& image : batch) {
    for (double v : image.values()) tensor.push_back(static_cast<float>(v));
  }
  const auto raw = predict_raw(tensor, batch.size());
  Logits logits(batch.size(), static_cast<std::size_t>(classes_));
  for (std::size_t r = 0; r < batch.size(); ++r) {
    for (int k = 0; k < classes_; ++k) logits.at(r, k) = raw[r * classes_ + k];
  }
  return logits;
}

void Normalization::apply(ImageTensor& image) const {
  if (mean.size() != static_cast<std::size_t>(image.channels()) ||
      stddev.size() != static_cast<std::size_t>(image.channels())) {
    throw ConfigError("normalization recipe does not match the channel count");
  }
  for (int c = 0; c < image.channels(); ++c) {
    for (double& v : image.channel(c)) v = (v - mean[c]) / stddev[c];
  }
}

ClassifierEndpoint::ClassifierEndpoint(std::shared_ptr<const Classifier> backend,
                                       std::optional<Normalization> normalization, std::string id)
    : backend_(std::move(backend)), normalization_(std::move(normalization)), id_(std::move(id)) {
  if (!backend_) throw ConfigError("endpoint needs a classifier backend");
}

Logits ClassifierEndpoint::predict_logits(std::span<const ImageTensor> batch) const {
  const ImageShape expected = input_shape();
  for (const auto& image : batch) {
    if (image.shape() != expected) {
      throw ConfigError("input " + image.shape().to_string() + " does not match endpoint shape " +
                        expected.to_string());
    }
  }
  images_processed_->fetch_add(batch.size());
  if (batch.empty()) return Logits(0, static_cast<std::size_t>(class_count()));
  if (!normalization_) return backend_->predict(batch);
  std::vector<ImageTensor> normalized(batch.begin(), batch.end());
  for (auto& image : normalized) normalization_->apply(image);
  return backend_->predict(normalized);
}

PreparedImages::PreparedImages(std::vector<ImageTensor> images) : images_(std::move(images)) {
  spectra_.reserve(images_.size());
  for (const auto& image : images_) {
    if (!image.label()) throw DataError("prepared images must be labeled");
    spectra_.push_back(forward_spectrum(image));
  }
}

std::vector<std::size_t> PreparedImages::indices_of(int c) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < images_.size(); ++i) {
    if (*images_[i].label() == c) out.push_back(i);
  }
  return out;
}

ClassValues ClassTally::mean_loss() const {
  ClassValues out(count.size());
  for (std::size_t c = 0; c < count.size(); ++c) {
    if (count[c] > 0) out[c] = loss_sum[c] / static_cast<double>(count[c]);
  }
  return out;
}

ClassValues ClassTally::tpr() const {
  ClassValues out(count.size());
  for (std::size_t c = 0; c < count.size(); ++c) {
    if (count[c] > 0) out[c] = static_cast<double>(correct[c]) / static_cast<double>(count[c]);
  }
  return out;
}

std::vector<int> predict_labels(const Logits& logits) {
  std::vector<int> out(logits.rows());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    auto row = logits.row(r);
    out[r] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

double cross_entropy(std::span<const double> logits, int label) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - peak);
  return std::log(sum) + peak - logits[label];
}

ClassTally evaluate_classes(const ClassifierEndpoint& endpoint, const PreparedImages& images,
                            std::span<const std::size_t> indices, const FrequencyMask* mask) {
  const int classes = endpoint.class_count();
  ClassTally tally{std::vector<double>(classes, 0.0), std::vector<std::size_t>(classes, 0),
                   std::vector<std::size_t>(classes, 0)};
  const std::size_t batch_size = endpoint.batch_size();
  std::vector<ImageTensor> batch;
  batch.reserve(std::min(batch_size, indices.size()));

  for (std::size_t start = 0; start < indices.size(); start += batch_size) {
    const std::size_t end = std::min(indices.size(), start + batch_size);
    batch.clear();
    for (std::size_t i = start; i < end; ++i) {
      const std::size_t idx = indices[i];
      require_label(images.image(idx), classes);
      if (mask != nullptr) {
        batch.push_back(filter_spectra(images.spectra(idx), *mask, images.image(idx).label()));
      } else {
        batch.push_back(images.image(idx));
      }
    }
    const Logits logits = endpoint.predict_logits(batch);
    if (logits.rows() != batch.size() || logits.cols() != static_cast<std::size_t>(classes)) {
      throw RemoteError("endpoint returned a logits matrix of the wrong shape", false);
    }
    for (std::size_t r = 0; r < batch.size(); ++r) {
      const int label = *batch[r].label();
      auto row = logits.row(r);
      tally.loss_sum[label] += cross_entropy(row, label);
      const auto best = std::max_element(row.begin(), row.end()) - row.begin();
      if (best == label) ++tally.correct[label];
      ++tally.count[label];
    }
  }
  return tally;
}

namespace {

ClassTally evaluate_all(const ClassifierEndpoint& endpoint, std::span<const ImageTensor> images,
                        const FrequencyMask* mask) {
  PreparedImages prepared(std::vector<ImageTensor>(images.begin(), images.end()));
  std::vector<std::size_t> all(prepared.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return evaluate_classes(endpoint, prepared, all, mask);
}

}  // namespace

ClassValues class_losses(const ClassifierEndpoint& endpoint, std::span<const ImageTensor> images,
                         const FrequencyMask* mask) {
  return evaluate_all(endpoint, images, mask).mean_loss();
}

ClassValues class_tpr(const ClassifierEndpoint& endpoint, std::span<const ImageTensor> images,
                      const FrequencyMask* mask) {
  return evaluate_all(endpoint, images, mask).tpr();
}

void save_classifier(const SpectralLinearClassifier& model,
                     const std::optional<Normalization>& normalization,
                     const std::filesystem::path& path) {
  json header = {{"kind", "spectral_linear"},
                 {"classes", model.class_count()},
                 {"shape", shape_json(model.input_shape())},
                 {"bias", std::vector<double>(model.bias().begin(), model.bias().end())},
                 {"encoding", "float64-le"}};
  if (normalization) {
    header["normalization"] = {{"mean", normalization->mean}, {"std", normalization->stddev}};
  }
  std::vector<double> w(model.weights().begin(), model.weights().end());
  write_file(path, encode_headered({std::string(kSpectralMagic), header.dump(), pack(w)}));
}

void save_classifier(const ReferenceLinearModel& model, const std::filesystem::path& path) {
  json header = {{"kind", "reference_linear"},
                 {"classes", model.class_count()},
                 {"shape", shape_json(model.input_shape())},
                 {"encoding", "float32-le"}};
  std::vector<float> body(model.bias().begin(), model.bias().end());
  body.insert(body.end(), model.weights().begin(), model.weights().end());
  write_file(path, encode_headered({std::string(kReferenceMagic), header.dump(), pack(body)}));
}

ClassifierEndpoint load_builtin_endpoint(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  const std::string id = "builtin:" + path.string();
  try {
    if (bytes.rfind(kSpectralMagic, 0) == 0) {
      auto file = decode_headered(bytes, kSpectralMagic);
      const json header = json::parse(file.header_json);
      const ImageShape shape = shape_from(header.at("shape"));
      const int classes = header.at("classes").get<int>();
      auto weights = unpack<double>(file.body, static_cast<std::size_t>(classes) * shape.plane_size());
      auto model = std::make_shared<SpectralLinearClassifier>(
          shape, classes, std::move(weights), header.at("bias").get<std::vector<double>>());
      std::optional<Normalization> norm;
      if (header.contains("normalization")) {
        norm = Normalization{header["normalization"].at("mean").get<std::vector<double>>(),
                             header["normalization"].at("std").get<std::vector<double>>()};
      }
      return ClassifierEndpoint(std::move(model), std::move(norm), id);
    }
    if (bytes.rfind(kReferenceMagic, 0) == 0) {
      auto file = decode_headered(bytes, kReferenceMagic);
      const json header = json::parse(file.header_json);
      const ImageShape shape = shape_from(header.at("shape"));
      const int classes = header.at("classes").get<int>();
      auto body = unpack<float>(file.body, static_cast<std::size_t>(classes) * (shape.size() + 1));
      std::vector<float> bias(body.begin(), body.begin() + classes);
      std::vector<float> weights(body.begin() + classes, body.end());
      return ClassifierEndpoint(
          std::make_shared<ReferenceLinearModel>(shape, classes, std::move(weights), std::move(bias)),
          std::nullopt, id);
    }
  } catch (const json::exception& e) {
    throw IoError("malformed classifier header in " + path.string() + ": " + e.what());
  }
  throw IoError(path.string() + " is not a recognized classifier file");
}

ClassifierEndpoint open_endpoint(const std::string& spec, std::optional<ImageShape> remote_shape) {
  if (spec.rfind("builtin:", 0) == 0) return load_builtin_endpoint(spec.substr(8));
  if (spec.rfind("remote:", 0) == 0) {
    if (!remote_shape) throw ConfigError("remote endpoints need a known input shape");
    auto transport = connect_transport(spec.substr(7));
    return ClassifierEndpoint(
        std::make_shared<RemoteClassifier>(std::move(transport), *remote_shape), std::nullopt, spec);
  }
  throw ConfigError("endpoint must be builtin:<file> or remote:<address>, got '" + spec + "'");
}

}  // namespace hfss
