#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ctxspell/bayes.hpp"
#include "ctxspell/corpus.hpp"
#include "ctxspell/error.hpp"
#include "ctxspell/trigram.hpp"

namespace ctxspell {

enum class Method { Trigrams, Bayes };

inline const char* method_name(Method m) {
    return m == Method::Trigrams ? "trigrams" : "bayes";
}

// One confusion set's trained state. `bayes` is the stand-alone classifier
// trained on every occurrence; `subset_bayes` is the hybrid's classifier,
// trained only on occurrences where all members would get the same tag. When
// that subset is empty, subset_bayes degrades to the full training priors.
struct PerSetModel {
    ConfusionSet set;
    std::map<std::string, std::int64_t> full_counts;  // member -> train occurrences
    BayesModel bayes;
    BayesModel subset_bayes;
    bool subset_fallback = false;

    std::int64_t total_train_occurrences() const {
        std::int64_t total = 0;
        for (const auto& [member, count] : full_counts) total += count;
        return total;
    }
};

// Prior-only classifier over the given counts; used when the same-tag
// training subset is empty.
inline BayesModel make_prior_model(const ConfusionSet& set, const BayesConfig& config,
                                   const std::map<std::string, std::int64_t>& counts) {
    BayesModel model;
    model.set = set;
    model.config = config;
    std::int64_t total = 0;
    for (const std::string& member : set.words) {
        auto it = counts.find(member);
        std::int64_t n = it == counts.end() ? 0 : it->second;
        model.occurrence_counts[member] = n;
        total += n;
    }
    model.total_occurrences = total;
    model.prior_only = total == 0;
    return model;
}

struct TribayesPrediction {
    std::string predicted;
    Method method = Method::Trigrams;
    bool same_tag = false;
    // Per-word geometric means on the trigram path, normalized posteriors on
    // the Bayes path. Exactly the two quantities the threshold compares.
    double prob_predicted = 0.0;
    double prob_original = 0.0;

    double ratio() const {
        if (prob_original <= 0.0)
            return prob_predicted > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
        return prob_predicted / prob_original;
    }
};

namespace detail {

inline std::string posterior_argmax(const Posterior& posterior, const std::string& original) {
    std::string best;
    double best_score = 0.0;
    bool have = false;
    for (const auto& [member, lp] : posterior.log_scores) {  // alphabetical
        if (!have || lp > best_score) {
            best = member;
            best_score = lp;
            have = true;
        } else if (lp == best_score && member == original && best != original) {
            best = member;
        }
    }
    return best;
}

}  // namespace detail

// The hybrid: score substitutions with the trigram model first; when the
// members would not all receive the same tag the trigram answer stands,
// otherwise the same-tag-trained Bayes classifier decides.
inline TribayesPrediction predict_tribayes(const TrigramModel& trigram,
                                           const PerSetModel& per_set,
                                           const TagDictionary& tag_dictionary,
                                           const Sentence& sentence, std::size_t position,
                                           const TrigramPrediction* precomputed = nullptr) {
    TrigramPrediction local;
    if (!precomputed) {
        local = predict_trigrams(trigram, sentence, position, per_set.set);
        precomputed = &local;
    }
    const std::string original = fold(sentence[position]);

    TribayesPrediction out;
    out.same_tag = precomputed->same_tag;
    if (!precomputed->same_tag) {
        out.method = Method::Trigrams;
        out.predicted = precomputed->predicted;
        for (const ScoredCandidate& sc : precomputed->candidates) {
            double p = is_log_zero(sc.log_prob_per_word) ? 0.0 : std::exp(sc.log_prob_per_word);
            if (sc.word == out.predicted) out.prob_predicted = p;
            if (sc.word == original) out.prob_original = p;
        }
        return out;
    }

    out.method = Method::Bayes;
    const Posterior posterior =
        per_set.subset_bayes.score(sentence, position, tag_dictionary);
    out.predicted = detail::posterior_argmax(posterior, original);
    const auto probabilities = posterior.probabilities();
    if (auto it = probabilities.find(out.predicted); it != probabilities.end())
        out.prob_predicted = it->second;
    if (auto it = probabilities.find(original); it != probabilities.end())
        out.prob_original = it->second;
    return out;
}

struct ThresholdModel {
    std::map<std::string, double> thresholds;  // set id -> ratio bound
    double steepness = 0.5;

    double threshold_for(const std::string& set_id) const {
        auto it = thresholds.find(set_id);
        return it == thresholds.end() ? 1.0 : it->second;
    }
};

// Empirical quantile (lower rank) of an ascending sample.
inline double ratio_quantile(const std::vector<double>& sorted_samples, double steepness) {
    if (sorted_samples.empty()) return 1.0;
    double scaled = steepness * static_cast<double>(sorted_samples.size() - 1);
    auto idx = static_cast<std::size_t>(scaled);
    if (idx >= sorted_samples.size()) idx = sorted_samples.size() - 1;
    return sorted_samples[idx];
}

inline ThresholdModel thresholds_from_samples(
    const std::map<std::string, std::vector<double>>& samples, double steepness) {
    if (steepness < 0.0 || steepness > 1.0)
        throw config_error("steepness must be in [0,1], got " + format_double(steepness));
    ThresholdModel model;
    model.steepness = steepness;
    for (const auto& [set_id, sorted] : samples)
        model.thresholds[set_id] = ratio_quantile(sorted, steepness);
    return model;
}

struct Suggestion {
    std::size_t sentence_index = 0;
    std::size_t position = 0;
    std::string original;   // surface as it appeared
    std::string suggested;  // lowercase member, possibly multi-token
    double ratio = 0.0;
    Method method = Method::Trigrams;
    bool suppressed = false;
};

// A prediction equal to the original word never becomes a suggestion.
inline std::optional<Suggestion> make_suggestion(const TribayesPrediction& prediction,
                                                 const Sentence& sentence,
                                                 std::size_t sentence_index,
                                                 std::size_t position) {
    const std::string original = fold(sentence[position]);
    if (prediction.predicted == original) return std::nullopt;
    Suggestion s;
    s.sentence_index = sentence_index;
    s.position = position;
    s.original = sentence[position];
    s.suggested = prediction.predicted;
    s.ratio = prediction.ratio();
    s.method = prediction.method;
    return s;
}

inline Suggestion apply_threshold(const ThresholdModel& thresholds,
                                  const std::string& set_id, Suggestion suggestion) {
    suggestion.suppressed = suggestion.ratio <= thresholds.threshold_for(set_id);
    return suggestion;
}

}  // namespace ctxspell
