#include "wikievents/classify.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "wikievents/error.hpp"
#include "wikievents/io.hpp"
#include "wikievents/random.hpp"
#include "wikievents/text.hpp"

namespace wikievents::classify {
namespace {

constexpr std::string_view kModelFormat = "wikievents-linear-model";
constexpr int kModelVersion = 1;

std::uint32_t Bucket(std::string_view feature, int feature_dims,
                     std::uint64_t salt) {
  // FNV alone mixes the low bits poorly; one SplitMix64 step finishes it.
  SplitMix64 mix(Fnv1a64(feature, kFnvOffset ^ salt));
  return static_cast<std::uint32_t>(mix() &
                                    static_cast<std::uint64_t>(feature_dims - 1));
}

// -log(sigmoid(z)) = log(1 + exp(-z)), without overflow.
double NegLogSigmoid(double z) {
  return z > 0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
}

double ExampleLoss(double margin, double y) {
  return y > 0.5 ? NegLogSigmoid(margin) : NegLogSigmoid(-margin);
}

void CheckDims(int feature_dims) {
  if (feature_dims < (1 << 10) ||
      !std::has_single_bit(static_cast<unsigned>(feature_dims))) {
    throw Error(ErrorKind::kInvalidConfig,
                "feature_dims must be a power of two >= 1024, got " +
                    std::to_string(feature_dims));
  }
}

std::string HexDouble(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

}  // namespace

void Validate(const TrainConfig& config) {
  if (config.epochs < 1) {
    throw Error(ErrorKind::kInvalidConfig, "epochs must be >= 1");
  }
  if (!(config.learning_rate > 0) || !std::isfinite(config.learning_rate)) {
    throw Error(ErrorKind::kInvalidConfig, "learning_rate must be > 0");
  }
  if (!(config.l2 >= 0) || config.learning_rate * config.l2 >= 1) {
    throw Error(ErrorKind::kInvalidConfig,
                "l2 must be >= 0 with learning_rate * l2 < 1");
  }
  if (config.backend == Backend::kBuiltinLinear) CheckDims(config.feature_dims);
  if (!config.external_params.is_object()) {
    throw Error(ErrorKind::kInvalidConfig, "external_params must be an object");
  }
}

LinearModel ZeroModel(int feature_dims, std::uint64_t salt) {
  CheckDims(feature_dims);
  LinearModel m;
  m.weights.assign(static_cast<std::size_t>(feature_dims), 0.0);
  m.salt = salt;
  return m;
}

SparseVector Featurize(std::span<const std::string> tokens, int feature_dims,
                       std::uint64_t salt) {
  std::vector<std::uint32_t> buckets;
  buckets.reserve(tokens.size() * 2);
  std::string previous;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string token = text::Lower(tokens[i]);
    buckets.push_back(Bucket("u:" + token, feature_dims, salt));
    if (i > 0) {
      buckets.push_back(Bucket("b:" + previous + " " + token, feature_dims, salt));
    }
    previous = token;
  }
  std::sort(buckets.begin(), buckets.end());
  SparseVector x;
  for (std::uint32_t b : buckets) {
    if (!x.empty() && x.back().first == b) {
      x.back().second += 1.0;
    } else {
      x.emplace_back(b, 1.0);
    }
  }
  return x;
}

SparseVector Featurize(const segment::Sentence& sentence, int feature_dims,
                       std::uint64_t salt) {
  if (sentence.tokens.empty() && !sentence.text.empty()) {
    return Featurize(segment::Tokenize(sentence.text), feature_dims, salt);
  }
  return Featurize(sentence.tokens, feature_dims, salt);
}

std::vector<Example> MakeExamples(std::span<const weaklabel::LabeledSentence> data,
                                  int feature_dims, std::uint64_t salt) {
  std::vector<Example> out;
  out.reserve(data.size());
  for (const auto& s : data) {
    out.push_back({Featurize(segment::Tokenize(s.text), feature_dims, salt),
                   s.label == weaklabel::Label::kPositive ? 1.0 : 0.0});
  }
  return out;
}

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double Margin(const LinearModel& model, const SparseVector& x) {
  double z = model.bias;
  for (const auto& [i, v] : x) z += model.weights[i] * v;
  return z;
}

double Objective(const LinearModel& model, std::span<const Example> examples,
                 double l2) {
  double loss = 0.0;
  for (const Example& e : examples) loss += ExampleLoss(Margin(model, e.x), e.y);
  if (!examples.empty()) loss /= static_cast<double>(examples.size());
  double norm = 0.0;
  for (double w : model.weights) norm += w * w;
  return loss + 0.5 * l2 * norm;
}

Gradient ObjectiveGradient(const LinearModel& model,
                           std::span<const Example> examples, double l2) {
  Gradient g;
  g.weights.assign(model.weights.size(), 0.0);
  const double n = static_cast<double>(std::max<std::size_t>(examples.size(), 1));
  for (const Example& e : examples) {
    const double r = (Sigmoid(Margin(model, e.x)) - e.y) / n;
    for (const auto& [i, v] : e.x) g.weights[i] += r * v;
    g.bias += r;
  }
  for (std::size_t i = 0; i < g.weights.size(); ++i) {
    g.weights[i] += l2 * model.weights[i];
  }
  return g;
}

TrainResult TrainBuiltin(std::span<const Example> examples,
                         const TrainConfig& config, int feature_dims,
                         std::uint64_t salt) {
  Validate(config);
  const auto positives = std::count_if(examples.begin(), examples.end(),
                                       [](const Example& e) { return e.y > 0.5; });
  if (positives == 0 || positives == static_cast<std::ptrdiff_t>(examples.size())) {
    throw Error(ErrorKind::kInvalidData,
                "training data needs both classes (" + std::to_string(positives) +
                    " positives of " + std::to_string(examples.size()) + ")");
  }

  TrainResult result;
  result.model = ZeroModel(feature_dims, salt);
  result.model.config_fingerprint = ConfigFingerprint(config);
  std::vector<double>& w = result.model.weights;
  double& b = result.model.bias;

  // The L2 shrink touches every weight each step; keep w = scale * v and
  // shrink the scalar instead.
  std::vector<double> v(w.size(), 0.0);
  double scale = 1.0;
  const double lr = config.learning_rate;
  const double shrink = 1.0 - lr * config.l2;

  std::vector<std::size_t> order(examples.size());
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    SplitMix64 rng = Substream(config.seed, "epoch:" + std::to_string(epoch));
    Shuffle(std::span(order), rng);
    for (std::size_t k : order) {
      const Example& e = examples[k];
      double z = 0.0;
      for (const auto& [i, x] : e.x) z += v[i] * x;
      const double r = Sigmoid(scale * z + b) - e.y;
      scale *= shrink;
      const double step = lr * r / scale;
      for (const auto& [i, x] : e.x) v[i] -= step * x;
      b -= lr * r;
      if (scale < 1e-100) {
        for (double& vi : v) vi *= scale;
        scale = 1.0;
      }
    }
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = scale * v[i];
    result.epoch_objective.push_back(Objective(result.model, examples, config.l2));
  }
  for (double wi : w) {
    if (!std::isfinite(wi)) {
      throw Error(ErrorKind::kInvalidData, "training diverged (non-finite weight)");
    }
  }
  return result;
}

TrainResult TrainBuiltin(std::span<const weaklabel::LabeledSentence> train,
                         const TrainConfig& config) {
  Validate(config);
  const auto examples = MakeExamples(train, config.feature_dims, kDefaultSalt);
  return TrainBuiltin(examples, config, config.feature_dims, kDefaultSalt);
}

double ScoreText(const LinearModel& model, std::string_view text) {
  return Sigmoid(Margin(model, Featurize(segment::Tokenize(text),
                                         model.feature_dims(), model.salt)));
}

namespace {

void CheckThreshold(double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorKind::kInvalidConfig, "threshold must be in [0, 1]");
  }
}

}  // namespace

std::vector<ScoredSentence> Score(const LinearModel& model,
                                  std::span<const segment::Sentence> sentences,
                                  double threshold) {
  CheckThreshold(threshold);
  std::vector<ScoredSentence> out;
  out.reserve(sentences.size());
  for (const segment::Sentence& s : sentences) {
    const double score = Sigmoid(
        Margin(model, Featurize(s, model.feature_dims(), model.salt)));
    out.push_back({s, score, score >= threshold});
  }
  return out;
}

std::vector<ScoredSentence> Attach(std::span<const segment::Sentence> sentences,
                                   std::span<const double> scores,
                                   double threshold) {
  CheckThreshold(threshold);
  if (sentences.size() != scores.size()) {
    throw Error(ErrorKind::kProtocol,
                "got " + std::to_string(scores.size()) + " scores for " +
                    std::to_string(sentences.size()) + " sentences");
  }
  std::vector<ScoredSentence> out;
  out.reserve(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    out.push_back({sentences[i], scores[i], scores[i] >= threshold});
  }
  return out;
}

std::string SerializeModel(const LinearModel& model) {
  nlohmann::ordered_json j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["feature_dims"] = model.feature_dims();
  j["salt"] = model.salt;
  j["bias"] = model.bias;
  j["config_fingerprint"] = model.config_fingerprint;
  auto weights = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < model.weights.size(); ++i) {
    if (model.weights[i] != 0.0) weights.push_back({i, model.weights[i]});
  }
  j["weights"] = std::move(weights);
  return j.dump() + "\n";
}

LinearModel ParseModel(std::string_view contents) {
  try {
    const auto j = nlohmann::json::parse(contents);
    if (j.at("format") != kModelFormat) {
      throw Error(ErrorKind::kInvalidInput, "not a linear model file");
    }
    if (j.at("version") != kModelVersion) {
      throw Error(ErrorKind::kInvalidInput, "unsupported model version");
    }
    const int dims = j.at("feature_dims").get<int>();
    LinearModel m = ZeroModel(dims, j.at("salt").get<std::uint64_t>());
    m.bias = j.at("bias").get<double>();
    m.config_fingerprint = j.value("config_fingerprint", "");
    for (const auto& pair : j.at("weights")) {
      const auto i = pair.at(0).get<std::size_t>();
      if (i >= m.weights.size()) {
        throw Error(ErrorKind::kInvalidInput, "weight index out of range");
      }
      m.weights[i] = pair.at(1).get<double>();
    }
    if (!std::isfinite(m.bias) ||
        !std::all_of(m.weights.begin(), m.weights.end(),
                     [](double w) { return std::isfinite(w); })) {
      throw Error(ErrorKind::kInvalidInput, "model has non-finite values");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidInput, std::string("bad model: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kInvalidConfig) {
      throw Error(ErrorKind::kInvalidInput, std::string("bad model: ") + e.what());
    }
    throw;
  }
}

void SaveModel(const std::filesystem::path& path, const LinearModel& model) {
  io::WriteFile(path, SerializeModel(model));
}

LinearModel LoadModel(const std::filesystem::path& path) {
  return ParseModel(io::ReadFile(path));
}

std::string ConfigFingerprint(const TrainConfig& config) {
  std::string canonical =
      config.backend == Backend::kExternal ? "external" : "builtin_linear";
  canonical += ";epochs=" + std::to_string(config.epochs);
  canonical += ";lr=" + HexDouble(config.learning_rate);
  canonical += ";l2=" + HexDouble(config.l2);
  canonical += ";seed=" + std::to_string(config.seed);
  canonical += ";dims=" + std::to_string(config.feature_dims);
  canonical += ";params=" + config.external_params.dump();
  return text::Hex64(Fnv1a64(canonical));
}

}  // namespace wikievents::classify
