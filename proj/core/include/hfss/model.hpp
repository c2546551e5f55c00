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

#ifndef HFSS_MODEL_HPP_
#define HFSS_MODEL_HPP_

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hfss/image.hpp"
#include "hfss/spectral.hpp"

namespace hfss {

// Row-major batch x classes matrix.
class Logits {
 public:
  Logits() = default;
  Logits(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), values_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(values_).subspan(r * cols_, cols_);
  }
  std::span<double> row(std::size_t r) {
    return std::span<double>(values_).subspan(r * cols_, cols_);
  }
  double at(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  double& at(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

// Backend of a ClassifierEndpoint. Implementations must be safe to call
// concurrently.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual int class_count() const = 0;
  virtual ImageShape input_shape() const = 0;
  // batch.size() x class_count() logits; inputs already match input_shape().
  virtual Logits predict(std::span<const ImageTensor> batch) const = 0;
};

// Per-bin spectrum magnitude averaged over channels, center-shifted layout.
std::vector<double> magnitude_features(const ImageTensor& image);

// Linear model over spectrum magnitudes: logit_k = bias_k + <W_k, |F(x)|>.
// A bin zeroed by a mask contributes nothing.
class SpectralLinearClassifier final : public Classifier {
 public:
  SpectralLinearClassifier(ImageShape shape, int classes, std::vector<double> weights,
                           std::vector<double> bias);

  // Evidence detector over known per-class bands. With ref_k the mean band
  // magnitude of class-k training images, the logit is
  //   gain * (mean_{b in band_k} |F_b| / ref_k - required_fraction_k),
  // i.e. it turns positive once the image carries that fraction of the
  // typical class-k evidence.
  static SpectralLinearClassifier evidence_detector(std::span<const FrequencyMask> bands,
                                                    std::span<const ImageTensor> training,
                                                    std::span<const double> required_fraction,
                                                    double gain);

  int class_count() const override { return classes_; }
  ImageShape input_shape() const override { return shape_; }
  Logits predict(std::span<const ImageTensor> batch) const override;

  std::span<const double> weights() const { return weights_; }
  std::span<const double> bias() const { return bias_; }

 private:
  ImageShape shape_;
  int classes_;
  std::vector<double> weights_;  // classes x height x width
  std::vector<double> bias_;
};

// Linear model over raw pixels evaluated in float32 with a fixed
// summation order, so any implementation of the same arithmetic
// reproduces it bit for bit. Used to check remote transports.
class ReferenceLinearModel final : public Classifier {
 public:
  ReferenceLinearModel(ImageShape shape, int classes, std::vector<float> weights,
                       std::vector<float> bias);

  // W[k][i] = 1 if i == k else 0; logits are the first `classes` pixels.
  static ReferenceLinearModel identity(ImageShape shape, int classes);
  // Weights drawn uniformly from [-scale, scale] with a fixed seed.
  static ReferenceLinearModel random(ImageShape shape, int classes, std::uint64_t seed,
                                     float scale);

  int class_count() const override { return classes_; }
  ImageShape input_shape() const override { return shape_; }
  Logits predict(std::span<const ImageTensor> batch) const override;
  // Same arithmetic on a raw float32 tensor (batch x C x H x W).
  std::vector<float> predict_raw(std::span<const float> tensor, std::size_t batch) const;

  std::span<const float> weights() const { return weights_; }
  std::span<const float> bias() const { return bias_; }

 private:
  ImageShape shape_;
  int classes_;
  std::vector<float> weights_;  // classes x (C*H*W)
  std::vector<float> bias_;
};

// Per-channel (x - mean) / std, applied after filtering.
struct Normalization {
  std::vector<double> mean;
  std::vector<double> stddev;

  void apply(ImageTensor& image) const;
};

// Per-class statistic; nullopt marks a class with no images.
using ClassValues = std::vector<std::optional<double>>;

// A classifier plus the input recipe fixed for it. Counts every image
// pushed through predict_logits.
class ClassifierEndpoint {
 public:
  explicit ClassifierEndpoint(std::shared_ptr<const Classifier> backend,
                              std::optional<Normalization> normalization = std::nullopt,
                              std::string id = "builtin");

  int class_count() const { return backend_->class_count(); }
  ImageShape input_shape() const { return backend_->input_shape(); }
  const std::string& id() const { return id_; }
  const std::optional<Normalization>& normalization() const { return normalization_; }

  std::size_t batch_size() const { return batch_size_; }
  void set_batch_size(std::size_t n) { batch_size_ = n == 0 ? 1 : n; }

  // Throws ConfigError on a shape mismatch. Applies the normalization
  // recipe (if any) to a copy of the batch before calling the backend.
  Logits predict_logits(std::span<const ImageTensor> batch) const;

  // Copies of an endpoint share one counter.
  std::size_t images_processed() const { return images_processed_->load(); }
  void reset_counter() { images_processed_->store(0); }

 private:
  std::shared_ptr<const Classifier> backend_;
  std::optional<Normalization> normalization_;
  std::string id_;
  std::size_t batch_size_ = 64;
  std::shared_ptr<std::atomic<std::size_t>> images_processed_ =
      std::make_shared<std::atomic<std::size_t>>(0);
};

// Labeled images with their spectra cached for repeated masked evaluation.
class PreparedImages {
 public:
  PreparedImages() = default;
  explicit PreparedImages(std::vector<ImageTensor> images);

  std::size_t size() const { return images_.size(); }
  const ImageTensor& image(std::size_t i) const { return images_[i]; }
  std::span<const ImageTensor> images() const { return images_; }
  std::span<const ChannelSpectrum> spectra(std::size_t i) const { return spectra_[i]; }
  int label(std::size_t i) const { return *images_[i].label(); }
  // Indices of images labeled `c`, ascending.
  std::vector<std::size_t> indices_of(int c) const;

 private:
  std::vector<ImageTensor> images_;
  std::vector<std::vector<ChannelSpectrum>> spectra_;
};

struct ClassTally {
  std::vector<double> loss_sum;
  std::vector<std::size_t> correct;
  std::vector<std::size_t> count;

  ClassValues mean_loss() const;
  ClassValues tpr() const;
};

// One pass over images[indices]: filter by `mask` (when given), predict in
// batches, and accumulate softmax cross-entropy and argmax hits per class.
// Ties in argmax go to the lower class index.
ClassTally evaluate_classes(const ClassifierEndpoint& endpoint, const PreparedImages& images,
                            std::span<const std::size_t> indices, const FrequencyMask* mask);

std::vector<int> predict_labels(const Logits& logits);
double cross_entropy(std::span<const double> logits, int label);

// Mean -log softmax(logits)[c] per class c.
ClassValues class_losses(const ClassifierEndpoint& endpoint, std::span<const ImageTensor> images,
                         const FrequencyMask* mask);
// (# class-c images predicted c) / (# class-c images).
ClassValues class_tpr(const ClassifierEndpoint& endpoint, std::span<const ImageTensor> images,
                      const FrequencyMask* mask);

// Classifier files (`builtin:<file>`).
void save_classifier(const SpectralLinearClassifier& model,
                     const std::optional<Normalization>& normalization,
                     const std::filesystem::path& path);
void save_classifier(const ReferenceLinearModel& model, const std::filesystem::path& path);
ClassifierEndpoint load_builtin_endpoint(const std::filesystem::path& path);

// Parses builtin:<file> or remote:<address>. Remote endpoints need the
// input shape up front; their class count is probed on connect.
ClassifierEndpoint open_endpoint(const std::string& spec, std::optional<ImageShape> remote_shape);

}  // namespace hfss

#endif  // HFSS_MODEL_HPP_
