#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ctxspell/bayes.hpp"
#include "ctxspell/config.hpp"
#include "ctxspell/corpus.hpp"
#include "ctxspell/error.hpp"
#include "ctxspell/tribayes.hpp"
#include "ctxspell/trigram.hpp"

namespace ctxspell {

// Everything one training run produces: the shared trigram model, the raw
// tag dictionary the Bayes classifiers match against, per-set models,
// suppression thresholds and the ratio samples they were fitted from.
struct SystemModel {
    RunConfig config;

    std::string corpus_digest;
    std::int64_t corpus_sentences = 0;
    bool holdout = false;

    TagDictionary tag_dictionary;
    TrigramModel trigram;
    std::vector<std::string> set_order;           // confusion-set file order
    std::map<std::string, PerSetModel> sets;      // set id -> models
    std::map<std::string, std::vector<double>> ratio_samples;  // sorted ascending
    ThresholdModel thresholds;

    const PerSetModel& per_set(const std::string& set_id) const {
        auto it = sets.find(set_id);
        if (it == sets.end()) throw config_error("unknown confusion set: " + set_id);
        return it->second;
    }

    std::vector<ConfusionSet> confusion_sets() const {
        std::vector<ConfusionSet> out;
        out.reserve(set_order.size());
        for (const std::string& id : set_order) out.push_back(sets.at(id).set);
        return out;
    }
};

namespace detail {

// Stripped sentences are shared across the occurrences of one sentence.
class StrippedCache {
public:
    explicit StrippedCache(const TaggedCorpus& corpus) : corpus_(corpus) {}

    const Sentence& get(std::size_t sentence_index) {
        auto it = cache_.find(sentence_index);
        if (it == cache_.end())
            it = cache_.emplace(sentence_index,
                                strip_tags(corpus_.sentences[sentence_index])).first;
        return it->second;
    }

private:
    const TaggedCorpus& corpus_;
    std::map<std::size_t, Sentence> cache_;
};

inline std::vector<double> reservoir_cap(const std::vector<double>& samples,
                                         std::int64_t cap, std::uint64_t seed) {
    if (static_cast<std::int64_t>(samples.size()) <= cap) return samples;
    std::mt19937_64 rng(seed);
    std::vector<double> reservoir(samples.begin(),
                                  samples.begin() + static_cast<std::ptrdiff_t>(cap));
    for (std::size_t i = static_cast<std::size_t>(cap); i < samples.size(); ++i) {
        std::uint64_t j = bounded_draw(rng, i + 1);
        if (j < static_cast<std::uint64_t>(cap)) reservoir[j] = samples[i];
    }
    return reservoir;
}

}  // namespace detail

// Disagreement ratios over the training occurrences of one set: wherever the
// hybrid would change a word of correct text, the suggested-to-original
// probability ratio is a would-be false negative. Thresholds are quantiles
// of this sample. Returned sorted ascending, reservoir-capped.
inline std::vector<double> collect_ratio_samples(
    const TrigramModel& trigram, const PerSetModel& per_set,
    const TagDictionary& tag_dictionary, const TaggedCorpus& train,
    std::int64_t cap, std::uint64_t seed,
    const std::vector<TrigramPrediction>* cached = nullptr) {
    detail::StrippedCache stripped(train);
    std::vector<double> ratios;
    const std::vector<Occurrence> occurrences = find_occurrences(train, per_set.set);
    for (std::size_t i = 0; i < occurrences.size(); ++i) {
        const Occurrence& occ = occurrences[i];
        const Sentence& sentence = stripped.get(occ.sentence_index);
        const TrigramPrediction* pre = cached ? &(*cached)[i] : nullptr;
        TribayesPrediction prediction =
            predict_tribayes(trigram, per_set, tag_dictionary, sentence, occ.position, pre);
        if (prediction.predicted != fold(sentence[occ.position]))
            ratios.push_back(prediction.ratio());
    }
    std::vector<double> capped =
        detail::reservoir_cap(ratios, cap, seed ^ fnv1a64(per_set.set.id));
    std::sort(capped.begin(), capped.end());
    return capped;
}

// Refit thresholds from scratch against a training corpus. The training
// pipeline produces identical samples through its prediction cache.
inline void fit_thresholds(SystemModel& system, const TaggedCorpus& train,
                           double steepness) {
    system.ratio_samples.clear();
    for (const std::string& id : system.set_order) {
        system.ratio_samples[id] =
            collect_ratio_samples(system.trigram, system.sets.at(id),
                                  system.tag_dictionary, train,
                                  system.config.ratio_sample_cap, system.config.seed);
    }
    system.thresholds = thresholds_from_samples(system.ratio_samples, steepness);
    system.config.steepness = steepness;
}

// Refit thresholds at a new steepness from the persisted ratio samples.
inline void retune_thresholds(SystemModel& system, double steepness) {
    system.thresholds = thresholds_from_samples(system.ratio_samples, steepness);
    system.config.steepness = steepness;
}

// Full training run: one global trigram model, then per confusion set the
// stand-alone Bayes classifier, the same-tag-subset classifier for the
// hybrid, and finally the suppression thresholds.
inline SystemModel train_system(const TaggedCorpus& train,
                                const std::vector<ConfusionSet>& sets,
                                const RunConfig& config) {
    config.validate();
    if (sets.empty()) throw config_error("no confusion sets configured");

    SystemModel system;
    system.config = config;
    system.corpus_sentences = static_cast<std::int64_t>(train.sentences.size());
    system.tag_dictionary = train.tag_dictionary;
    system.trigram = train_trigram(train, config.trigram);

    std::map<std::string, std::vector<TrigramPrediction>> prediction_cache;
    for (const ConfusionSet& set : sets) {
        if (system.sets.count(set.id))
            throw config_error("duplicate confusion set: " + set.id);

        PerSetModel per_set;
        per_set.set = set;
        for (const std::string& member : set.words) per_set.full_counts[member] = 0;

        const std::vector<Occurrence> occurrences = find_occurrences(train, set);
        detail::StrippedCache stripped(train);
        std::vector<TrigramPrediction>& cache = prediction_cache[set.id];
        cache.reserve(occurrences.size());
        std::set<std::pair<std::size_t, std::size_t>> same_tag_subset;
        for (const Occurrence& occ : occurrences) {
            const TaggedSentence& tagged = train.sentences[occ.sentence_index];
            ++per_set.full_counts[fold(tagged[occ.position].surface)];
            cache.push_back(predict_trigrams(system.trigram, stripped.get(occ.sentence_index),
                                             occ.position, set));
            if (cache.back().same_tag)
                same_tag_subset.insert({occ.sentence_index, occ.position});
        }

        per_set.bayes = train_bayes(train, set, config.bayes);
        if (same_tag_subset.empty()) {
            per_set.subset_fallback = true;
            per_set.subset_bayes = make_prior_model(set, config.bayes, per_set.full_counts);
        } else {
            per_set.subset_bayes =
                train_bayes(train, set, config.bayes, [&](const Occurrence& occ) {
                    return same_tag_subset.count({occ.sentence_index, occ.position}) > 0;
                });
        }

        system.set_order.push_back(set.id);
        system.sets.emplace(set.id, std::move(per_set));
    }

    for (const std::string& id : system.set_order) {
        system.ratio_samples[id] = collect_ratio_samples(
            system.trigram, system.sets.at(id), system.tag_dictionary, train,
            config.ratio_sample_cap, config.seed, &prediction_cache.at(id));
    }
    system.thresholds = thresholds_from_samples(system.ratio_samples, config.steepness);
    return system;
}

inline ThresholdModel make_uniform_thresholds(const std::vector<std::string>& set_ids,
                                              double value) {
    ThresholdModel model;
    model.steepness = 0.5;
    for (const std::string& id : set_ids) model.thresholds[id] = value;
    return model;
}

// Predict at a target and wrap the outcome as a thresholded suggestion.
inline std::optional<Suggestion> suggest_at(const SystemModel& system,
                                            const ThresholdModel& thresholds,
                                            const std::string& set_id,
                                            const Sentence& sentence,
                                            std::size_t sentence_index,
                                            std::size_t position) {
    const PerSetModel& per_set = system.per_set(set_id);
    TribayesPrediction prediction =
        predict_tribayes(system.trigram, per_set, system.tag_dictionary, sentence, position);
    std::optional<Suggestion> suggestion =
        make_suggestion(prediction, sentence, sentence_index, position);
    if (!suggestion) return std::nullopt;
    return apply_threshold(thresholds, set_id, *suggestion);
}

}  // namespace ctxspell
