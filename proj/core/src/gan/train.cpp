// Copyright 2026 The mammodp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mammodp/gan/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mammodp/common/resample.hpp"
#include "mammodp/nn/optim.hpp"

namespace mammodp::gan {
namespace {

enum Stream : std::uint64_t { kShuffle = 1, kAugment = 2, kNoise = 3, kSample = 4 };

nn::AdamConfig AdamFor(double lr, const GanTrainConfig& c) { return {lr, c.beta1, c.beta2, 1e-8, 0.0, false}; }

BlobContainer MakeCheckpoint(const GanModel& model, const GanTrainConfig& config, int epoch, long step,
                             const Rng& noise_rng, const nn::Adam& g_opt, const nn::Adam& d_opt,
                             const std::vector<EpochLog>& epochs) {
  BlobContainer c;
  nn::StoreState(model.State(), c);
  g_opt.Store(c, "opt.g.");
  d_opt.Store(c, "opt.d.");
  nlohmann::json history = nlohmann::json::array();
  for (const auto& e : epochs) history.push_back({{"epoch", e.epoch}, {"d_loss", e.d_loss}, {"g_loss", e.g_loss}});
  c.metadata = {{"kind", "mcgan"},     {"config", config.ToJson()}, {"epoch", epoch},
                {"step", step},        {"rng", SerializeRng(noise_rng)}, {"epochs", history},
                {"digest", model.Digest()}};
  return c;
}

nn::Tensor ToBatch(const std::vector<GrayImage>& images) {
  const auto n = static_cast<std::int64_t>(images.size());
  std::vector<double> v;
  v.reserve(images.size() * kImageSide * kImageSide);
  for (const auto& img : images) {
    for (double p : img.pixels) v.push_back(2.0 * p - 1.0);
  }
  return nn::Tensor::FromData({n, 1, kImageSide, kImageSide}, std::move(v));
}

}  // namespace

void GanTrainConfig::Validate() const {
  std::vector<std::string> issues;
  if (batch_size < 2) issues.push_back("gan.batch_size must be >= 2");
  if (epochs < 0) issues.push_back("gan.epochs must be >= 0");
  if (max_steps < 0) issues.push_back("gan.max_steps must be >= 0");
  if (!(smoothing.low < smoothing.high)) issues.push_back("gan.smoothing range needs low < high");
  if (!(augment.flip_p >= 0.0 && augment.flip_p <= 1.0)) issues.push_back("gan.flip_p must lie in [0, 1]");
  if (!(augment.scale_low > 0.0 && augment.scale_low <= augment.scale_high)) issues.push_back("gan.crop_scale invalid");
  if (!(augment.ratio_low > 0.0 && augment.ratio_low <= augment.ratio_high)) issues.push_back("gan.crop_ratio invalid");
  if (augment.output_side != kImageSide) issues.push_back("gan output side is fixed at 128");
  if (!(g_lr > 0.0 && d_lr > 0.0)) issues.push_back("gan learning rates must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) issues.push_back("gan betas must lie in [0, 1)");
  if (arch.g_kernel < 2 || arch.g_kernel % 2) issues.push_back("gan.g_kernel must be even and >= 2");
  if (arch.d_kernel < 2 || arch.d_kernel % 2) issues.push_back("gan.d_kernel must be even and >= 2");
  if (arch.base_width < 1) issues.push_back("gan.base_width must be >= 1");
  if (arch.embed_dim < 1) issues.push_back("gan.embed_dim must be >= 1");
  if (arch.noise_dim != kNoiseDim) issues.push_back("gan noise dimension is fixed at 100");
  if (checkpoint_every < 0) issues.push_back("gan.checkpoint_every must be >= 0");
  if (!issues.empty()) throw ConfigError(issues);
}

nlohmann::json GanTrainConfig::ToJson() const {
  return {{"noise_dim", arch.noise_dim},
          {"embed_dim", arch.embed_dim},
          {"base_width", arch.base_width},
          {"g_kernel", arch.g_kernel},
          {"d_kernel", arch.d_kernel},
          {"leaky_slope", arch.leaky_slope},
          {"batch_size", batch_size},
          {"epochs", epochs},
          {"max_steps", max_steps},
          {"smoothing", {smoothing.low, smoothing.high}},
          {"flip_p", augment.flip_p},
          {"crop_scale", {augment.scale_low, augment.scale_high}},
          {"crop_ratio", {augment.ratio_low, augment.ratio_high}},
          {"g_lr", g_lr},
          {"d_lr", d_lr},
          {"betas", {beta1, beta2}},
          {"seed", seed},
          {"checkpoint_every", checkpoint_every}};
}

GanTrainConfig GanTrainConfig::FromJson(const nlohmann::json& j) {
  GanTrainConfig c;
  c.arch.noise_dim = j.at("noise_dim");
  c.arch.embed_dim = j.at("embed_dim");
  c.arch.base_width = j.at("base_width");
  c.arch.g_kernel = j.at("g_kernel");
  c.arch.d_kernel = j.at("d_kernel");
  c.arch.leaky_slope = j.at("leaky_slope");
  c.batch_size = j.at("batch_size");
  c.epochs = j.at("epochs");
  c.max_steps = j.at("max_steps");
  c.smoothing = {j.at("smoothing")[0], j.at("smoothing")[1]};
  c.augment.flip_p = j.at("flip_p");
  c.augment.scale_low = j.at("crop_scale")[0];
  c.augment.scale_high = j.at("crop_scale")[1];
  c.augment.ratio_low = j.at("crop_ratio")[0];
  c.augment.ratio_high = j.at("crop_ratio")[1];
  c.g_lr = j.at("g_lr");
  c.d_lr = j.at("d_lr");
  c.beta1 = j.at("betas")[0];
  c.beta2 = j.at("betas")[1];
  c.seed = j.at("seed");
  c.checkpoint_every = j.at("checkpoint_every");
  return c;
}

GanTrainResult TrainMcgan(const GanTrainConfig& config, std::span<const ingest::MassPatch> data,
                          const std::filesystem::path& out_dir) {
  config.Validate();
  if (data.empty()) throw EmptyInputError("GAN training needs at least one patch");
  GanTrainResult result;
  std::size_t malignant = 0;
  for (const auto& p : data) {
    if (!p.pixels.square()) throw ContractViolation("GAN training patches must be square");
    malignant += p.label == ingest::Label::kMalignant;
  }
  if (malignant == 0 || malignant == data.size()) {
    result.warnings.push_back("training data holds a single class; conditioning is degenerate");
  }

  result.model = GanModel(config.arch, config.seed);
  GanModel& model = result.model;
  nn::Adam g_opt(nn::Parameters(model.GeneratorState()), AdamFor(config.g_lr, config));
  nn::Adam d_opt(nn::Parameters(model.DiscriminatorState()), AdamFor(config.d_lr, config));
  Rng noise_rng = MakeRng(config.seed, {kNoise});

  auto emit = [&](int epoch, long step) {
    GanCheckpoint ck;
    ck.epoch = epoch;
    ck.step = step;
    ck.digest = model.Digest();
    ck.blob = MakeCheckpoint(model, config, epoch, step, noise_rng, g_opt, d_opt, result.epochs);
    if (!out_dir.empty()) {
      ck.path = out_dir / ("epoch_" + std::to_string(epoch) + ".ckpt");
      ck.blob.Save(ck.path);
    }
    result.checkpoints.push_back(std::move(ck));
  };

  const std::size_t n = data.size();
  const std::size_t batch = std::min<std::size_t>(config.batch_size, n);
  const std::size_t batches_per_epoch = std::max<std::size_t>(1, n / batch);
  long step = 0;
  int epoch = 0;
  bool capped = false;
  for (epoch = 1; epoch <= config.epochs && !capped; ++epoch) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng = MakeRng(config.seed, {kShuffle, static_cast<std::uint64_t>(epoch)});
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    EpochLog log{epoch, 0.0, 0.0, 0};
    for (std::size_t b = 0; b < batches_per_epoch; ++b) {
      if (config.max_steps > 0 && step >= config.max_steps) {
        capped = true;
        break;
      }
      std::vector<GrayImage> images;
      std::vector<int> labels;
      for (std::size_t k = b * batch; k < (b + 1) * batch; ++k) {
        const std::size_t idx = order[k];
        Rng aug_rng = MakeRng(config.seed, {kAugment, static_cast<std::uint64_t>(epoch), idx});
        images.push_back(Augment(data[idx].pixels, config.augment, aug_rng));
        labels.push_back(ingest::LabelIndex(data[idx].label));
      }
      const nn::Tensor real = ToBatch(images);
      const auto bsz = static_cast<std::int64_t>(labels.size());
      nn::Tensor z = SampleNoise(bsz, config.arch.noise_dim, noise_rng);
      StepLog s;
      s.step = step + 1;
      s.epoch = epoch;
      for (std::int64_t i = 0; i < bsz; ++i) s.real_targets.push_back(SmoothRealLabel(noise_rng, config.smoothing));

      nn::Tensor fake = model.generator.Forward(z, labels, true);
      // Discriminator step on real vs detached fake.
      d_opt.ZeroGrad();
      nn::Tensor d_loss = DiscriminatorLossFromLogits(model.discriminator.Forward(real, labels, true),
                                                      model.discriminator.Forward(fake.Detach(), labels, true),
                                                      s.real_targets);
      d_loss.Backward();
      d_opt.Step();
      // Generator step through the updated discriminator.
      g_opt.ZeroGrad();
      d_opt.ZeroGrad();
      nn::Tensor g_loss = GeneratorLossFromLogits(model.discriminator.Forward(fake, labels, true));
      g_loss.Backward();
      g_opt.Step();
      d_opt.ZeroGrad();

      s.d_loss = d_loss.item();
      s.g_loss = g_loss.item();
      log.d_loss += s.d_loss;
      log.g_loss += s.g_loss;
      ++log.steps;
      ++step;
      result.steps.push_back(std::move(s));
    }
    if (log.steps > 0) {
      log.d_loss /= static_cast<double>(log.steps);
      log.g_loss /= static_cast<double>(log.steps);
      result.epochs.push_back(log);
    }
    const bool last = epoch == config.epochs || capped ||
                      (config.max_steps > 0 && step >= config.max_steps);
    if (!last && config.checkpoint_every > 0 && epoch % config.checkpoint_every == 0) emit(epoch, step);
    if (last) {
      emit(log.steps > 0 ? epoch : epoch - 1, step);
      break;
    }
  }
  if (result.checkpoints.empty()) emit(0, 0);
  return result;
}

GanTrainConfig CheckpointConfig(const BlobContainer& checkpoint) {
  if (checkpoint.metadata.value("kind", "") != "mcgan") throw IoError("not a GAN checkpoint");
  return GanTrainConfig::FromJson(checkpoint.metadata.at("config"));
}

GanModel LoadGanModel(const BlobContainer& checkpoint) {
  const GanTrainConfig config = CheckpointConfig(checkpoint);
  GanModel model(config.arch, config.seed);
  nn::StateList state = model.State();
  nn::LoadState(checkpoint, state);
  return model;
}

std::vector<ingest::MassPatch> SampleSyntheticDataset(GanModel& model, int n_benign, int n_malignant,
                                                      std::uint64_t seed) {
  if (n_benign < 0 || n_malignant < 0) throw ContractViolation("sample counts must be nonnegative");
  nn::NoGradGuard no_grad;
  Rng rng = MakeRng(seed, {kSample});
  std::vector<int> labels(static_cast<std::size_t>(n_benign), 0);
  labels.insert(labels.end(), static_cast<std::size_t>(n_malignant), 1);
  std::vector<ingest::MassPatch> out;
  out.reserve(labels.size());
  constexpr std::size_t kChunk = 32;
  for (std::size_t start = 0; start < labels.size(); start += kChunk) {
    const std::size_t count = std::min(kChunk, labels.size() - start);
    std::span<const int> chunk(labels.data() + start, count);
    nn::Tensor z = SampleNoise(static_cast<std::int64_t>(count), model.arch.noise_dim, rng);
    nn::Tensor images = model.generator.Forward(z, chunk, false);
    const std::size_t plane = kImageSide * kImageSide;
    for (std::size_t i = 0; i < count; ++i) {
      ingest::MassPatch p;
      p.pixels = GrayImage(kImageSide, kImageSide);
      for (std::size_t k = 0; k < plane; ++k) {
        p.pixels.pixels[k] = std::clamp((images.data()[i * plane + k] + 1.0) / 2.0, 0.0, 1.0);
      }
      p.label = chunk[i] ? ingest::Label::kMalignant : ingest::Label::kBenign;
      p.synthetic = true;
      auto& rec = p.provenance;
      rec.image_id = "syn_" + std::string(chunk[i] ? "m" : "b") + "_" + std::to_string(start + i);
      rec.view = ingest::View::kNA;
      rec.label = p.label;
      rec.source = ingest::Source::kSynthetic;
      rec.box = ingest::BoundingBox{0, 0, kImageSide, kImageSide};
      out.push_back(std::move(p));
    }
  }
  return out;
}

std::size_t SelectCheckpoint(std::span<const CheckpointCandidate> candidates, std::span<const GrayImage> validation,
                             const eval::SetMetric& metric, std::vector<double>* scores) {
  if (candidates.empty()) throw EmptyInputError("no checkpoints to select from");
  const eval::FeatureMatrix reference = metric.featurize(validation);
  std::size_t best = 0;
  double best_score = 0.0;
  if (scores) scores->clear();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto samples = candidates[i].sample();
    std::vector<std::string> warnings;
    const double score = metric.distance(metric.featurize(samples), reference, warnings);
    if (scores) scores->push_back(score);
    const bool better = i == 0 || score < best_score ||
                        (score == best_score && candidates[i].epoch < candidates[best].epoch);
    if (better) {
      best = i;
      best_score = score;
    }
  }
  return best;
}

std::size_t SelectGanCheckpoint(std::span<const GanCheckpoint> checkpoints,
                                std::span<const ingest::MassPatch> validation, const eval::SetMetric& metric,
                                std::uint64_t seed, std::vector<double>* scores) {
  int n_benign = 0, n_malignant = 0;
  std::vector<GrayImage> reference;
  for (const auto& p : validation) {
    (p.label == ingest::Label::kMalignant ? n_malignant : n_benign) += 1;
    reference.push_back(Resample(p.pixels, kImageSide, kImageSide));
  }
  std::vector<CheckpointCandidate> candidates;
  for (const auto& ck : checkpoints) {
    candidates.push_back({"epoch_" + std::to_string(ck.epoch), ck.epoch, [&ck, n_benign, n_malignant, seed] {
                            GanModel model = LoadGanModel(ck.blob);
                            std::vector<GrayImage> images;
                            for (auto& p : SampleSyntheticDataset(model, n_benign, n_malignant, seed)) {
                              images.push_back(std::move(p.pixels));
                            }
                            return images;
                          }});
  }
  return SelectCheckpoint(candidates, reference, metric, scores);
}

}  // namespace mammodp::gan
