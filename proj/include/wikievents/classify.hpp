#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "wikievents/segment.hpp"
#include "wikievents/weaklabel.hpp"

// Binary sentence classifier: a hashed bag-of-words logistic regression
// trained with plain SGD, plus the scoring contract shared with external
// model processes.
namespace wikievents::classify {

enum class Backend { kBuiltinLinear, kExternal };

inline constexpr int kDefaultFeatureDims = 1 << 18;
inline constexpr std::uint64_t kDefaultSalt = 0x77696b6965766e74ULL;

struct TrainConfig {
  Backend backend = Backend::kBuiltinLinear;
  int epochs = 3;
  double learning_rate = 0.1;
  double l2 = 1e-6;
  std::uint64_t seed = 0;
  int feature_dims = kDefaultFeatureDims;  // builtin only
  nlohmann::json external_params = nlohmann::json::object();  // forwarded as is
};

// Throws invalid-config unless epochs >= 1, learning_rate > 0, l2 >= 0 and
// feature_dims is a power of two >= 2^10.
void Validate(const TrainConfig& config);

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  std::uint64_t salt = kDefaultSalt;
  std::string config_fingerprint;

  int feature_dims() const { return static_cast<int>(weights.size()); }
  bool operator==(const LinearModel&) const = default;
};

// A zero model with the config's dimensions.
LinearModel ZeroModel(int feature_dims, std::uint64_t salt = kDefaultSalt);

// Sorted by index, no repeated indices.
using SparseVector = std::vector<std::pair<std::uint32_t, double>>;

// Lowercased unigrams and adjacent bigrams, hashed into feature_dims buckets
// (a power of two); the value is the count.
SparseVector Featurize(std::span<const std::string> tokens, int feature_dims,
                       std::uint64_t salt);
SparseVector Featurize(const segment::Sentence& sentence, int feature_dims,
                       std::uint64_t salt);

struct Example {
  SparseVector x;
  double y = 0.0;  // 0 or 1
};

std::vector<Example> MakeExamples(std::span<const weaklabel::LabeledSentence> data,
                                  int feature_dims, std::uint64_t salt);

double Sigmoid(double z);
double Margin(const LinearModel& model, const SparseVector& x);

// mean BCE(sigmoid(w.x + b), y) + l2/2 * |w|^2; the bias is not penalized.
double Objective(const LinearModel& model, std::span<const Example> examples,
                 double l2);

struct Gradient {
  std::vector<double> weights;
  double bias = 0.0;
};

Gradient ObjectiveGradient(const LinearModel& model,
                           std::span<const Example> examples, double l2);

struct TrainResult {
  LinearModel model;
  std::vector<double> epoch_objective;  // Objective after each epoch
};

// Per-example SGD, example order shuffled per epoch from the seed. Throws
// invalid-data when the input is empty or has a single class.
TrainResult TrainBuiltin(std::span<const weaklabel::LabeledSentence> train,
                         const TrainConfig& config);
TrainResult TrainBuiltin(std::span<const Example> examples,
                         const TrainConfig& config, int feature_dims,
                         std::uint64_t salt = kDefaultSalt);

inline constexpr double kDefaultThreshold = 0.5;

struct ScoredSentence {
  segment::Sentence sentence;
  double score = 0.0;
  bool predicted = false;  // score >= threshold
};

double ScoreText(const LinearModel& model, std::string_view text);

// Input order is preserved. Throws invalid-config unless threshold is in
// [0, 1].
std::vector<ScoredSentence> Score(const LinearModel& model,
                                  std::span<const segment::Sentence> sentences,
                                  double threshold = kDefaultThreshold);

// Pairs externally produced scores with their sentences.
std::vector<ScoredSentence> Attach(std::span<const segment::Sentence> sentences,
                                   std::span<const double> scores,
                                   double threshold = kDefaultThreshold);

// JSON model file: format tag, feature_dims, salt, bias, config fingerprint
// and the nonzero weights as [index, value] pairs. Doubles round-trip exactly.
std::string SerializeModel(const LinearModel& model);
LinearModel ParseModel(std::string_view contents);  // invalid-input on errors
void SaveModel(const std::filesystem::path& path, const LinearModel& model);
LinearModel LoadModel(const std::filesystem::path& path);

std::string ConfigFingerprint(const TrainConfig& config);

}  // namespace wikievents::classify
