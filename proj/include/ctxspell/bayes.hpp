#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ctxspell/corpus.hpp"
#include "ctxspell/error.hpp"
#include "ctxspell/logprob.hpp"
#include "ctxspell/text.hpp"

namespace ctxspell {

struct BayesConfig {
    int context_window = 10;       // half-width of the context-word window
    int max_collocation_len = 2;   // max elements in a collocation pattern
    std::int64_t min_feature_support = 2;
    double smoothing_constant = 10.0;
    double min_discrimination = 0.05;
    bool use_context_words = true;

    void validate() const {
        if (context_window < 0) throw config_error("context_window must be >= 0");
        if (max_collocation_len < 1 || max_collocation_len > 8)
            throw config_error("max_collocation_length must be in [1,8]");
        if (min_feature_support < 0)
            throw config_error("min_feature_support must be >= 0");
        if (smoothing_constant < 0)
            throw config_error("smoothing_constant must be >= 0");
        if (min_discrimination < 0 || min_discrimination > 1)
            throw config_error("min_discrimination must be in [0,1]");
    }
};

struct PatternElement {
    bool is_tag = false;
    std::string text;

    bool operator==(const PatternElement&) const = default;
};

// Either the presence of a word within the context window, or a contiguous
// pattern of literal words / tag symbols adjacent to the target. left_len
// says how many pattern elements sit to the left of the target, which pins
// the placement (all left, all right, or straddling).
struct Feature {
    enum class Kind { ContextWord, Collocation };

    Kind kind = Kind::ContextWord;
    std::string word;                      // ContextWord
    std::vector<PatternElement> pattern;   // Collocation
    int left_len = 0;                      // Collocation

    std::string key() const {
        if (kind == Kind::ContextWord) return "CTXWORD " + word;
        std::string out = "COLLOC " + std::to_string(left_len);
        for (const PatternElement& e : pattern) {
            out += ' ';
            out += e.is_tag ? "t=" : "w=";
            out += e.text;
        }
        return out;
    }

    // Absolute sentence positions the pattern covers around `position`.
    std::vector<std::size_t> span(std::size_t position) const {
        std::vector<std::size_t> out;
        for (int i = 0; i < static_cast<int>(pattern.size()); ++i) {
            int offset = i < left_len ? i - left_len : i - left_len + 1;
            out.push_back(static_cast<std::size_t>(static_cast<int>(position) + offset));
        }
        return out;
    }
};

using TagDictionary = std::map<std::string, std::set<std::string>>;

namespace detail {

// All collocation features matching the context at `position`. A tag element
// matches a neighbor iff the tag belongs to the neighbor's set of possible
// tags, so one neighbor word can satisfy several tag variants at once.
inline void matching_collocations(const Sentence& sentence, std::size_t position,
                                  const BayesConfig& config,
                                  const TagDictionary& tag_dictionary,
                                  std::vector<Feature>& out) {
    const int len = static_cast<int>(sentence.size());
    const int pos = static_cast<int>(position);
    for (int total = 1; total <= config.max_collocation_len; ++total) {
        for (int left = 0; left <= total; ++left) {
            const int right = total - left;
            if (pos - left < 0 || pos + right >= len) continue;

            // Alternatives per element: the literal word plus every possible tag.
            std::vector<std::vector<PatternElement>> alternatives;
            bool viable = true;
            for (int i = 0; i < total; ++i) {
                int offset = i < left ? i - left : i - left + 1;
                const std::string folded = fold(sentence[static_cast<std::size_t>(pos + offset)]);
                std::vector<PatternElement> alts;
                alts.push_back({false, folded});
                if (auto it = tag_dictionary.find(folded); it != tag_dictionary.end())
                    for (const std::string& tag : it->second) alts.push_back({true, tag});
                if (alts.empty()) viable = false;
                alternatives.push_back(std::move(alts));
            }
            if (!viable) continue;

            std::vector<std::size_t> pick(static_cast<std::size_t>(total), 0);
            while (true) {
                Feature f;
                f.kind = Feature::Kind::Collocation;
                f.left_len = left;
                for (int i = 0; i < total; ++i)
                    f.pattern.push_back(alternatives[static_cast<std::size_t>(i)][pick[static_cast<std::size_t>(i)]]);
                out.push_back(std::move(f));

                int i = total - 1;
                while (i >= 0 && ++pick[static_cast<std::size_t>(i)] ==
                                     alternatives[static_cast<std::size_t>(i)].size()) {
                    pick[static_cast<std::size_t>(i)] = 0;
                    --i;
                }
                if (i < 0) break;
            }
        }
    }
}

}  // namespace detail

// Every feature matching the context: one context-word feature per distinct
// folded word within the window (target excluded), plus all matching
// collocations. The window truncates at sentence boundaries.
inline std::vector<Feature> match_features(const Sentence& sentence, std::size_t position,
                                           const BayesConfig& config,
                                           const TagDictionary& tag_dictionary) {
    std::vector<Feature> out;
    if (config.use_context_words) {
        std::set<std::string> seen;
        const int len = static_cast<int>(sentence.size());
        const int pos = static_cast<int>(position);
        for (int p = pos - config.context_window; p <= pos + config.context_window; ++p) {
            if (p < 0 || p >= len || p == pos) continue;
            seen.insert(fold(sentence[static_cast<std::size_t>(p)]));
        }
        for (const std::string& word : seen) {
            Feature f;
            f.kind = Feature::Kind::ContextWord;
            f.word = word;
            out.push_back(std::move(f));
        }
    }
    detail::matching_collocations(sentence, position, config, tag_dictionary, out);
    return out;
}

struct FeatureEntry {
    Feature feature;
    std::map<std::string, std::int64_t> member_matches;  // member -> occurrences matched
    std::int64_t total_matches = 0;
    double strength = 0.0;
};

struct Posterior {
    std::map<std::string, double> log_scores;  // member -> unnormalized log score
    std::vector<std::string> used_features;    // keys of the reduced set

    // Normalized P(member | features); members with zero prior get 0.
    std::map<std::string, double> probabilities() const {
        double norm = kLogZero;
        for (const auto& [member, lp] : log_scores) norm = log_add(norm, lp);
        std::map<std::string, double> out;
        for (const auto& [member, lp] : log_scores)
            out[member] = is_log_zero(lp) || is_log_zero(norm) ? 0.0 : std::exp(lp - norm);
        return out;
    }
};

struct BayesModel {
    ConfusionSet set;
    BayesConfig config;
    std::map<std::string, std::int64_t> occurrence_counts;  // member -> N_i
    std::int64_t total_occurrences = 0;
    std::map<std::string, FeatureEntry> features;  // feature key -> entry
    bool prior_only = false;  // trained with zero occurrences; priors are uniform

    double prior(const std::string& member) const {
        if (prior_only || total_occurrences == 0)
            return 1.0 / static_cast<double>(set.words.size());
        auto it = occurrence_counts.find(member);
        std::int64_t n = it == occurrence_counts.end() ? 0 : it->second;
        return static_cast<double>(n) / static_cast<double>(total_occurrences);
    }

    // Interpolates the per-member MLE with the marginal feature probability;
    // members with more training data trust their own estimate more.
    double smoothed_cond_prob(const FeatureEntry& entry, const std::string& member) const {
        auto it = occurrence_counts.find(member);
        const std::int64_t n = it == occurrence_counts.end() ? 0 : it->second;
        auto mit = entry.member_matches.find(member);
        const std::int64_t matches = mit == entry.member_matches.end() ? 0 : mit->second;
        const double alpha =
            static_cast<double>(n) / (static_cast<double>(n) + config.smoothing_constant);
        const double mle_member = n > 0 ? static_cast<double>(matches) / static_cast<double>(n) : 0.0;
        const double mle_marginal =
            total_occurrences > 0
                ? static_cast<double>(entry.total_matches) / static_cast<double>(total_occurrences)
                : 0.0;
        return alpha * mle_member + (1.0 - alpha) * mle_marginal;
    }

    double smoothed_cond_prob(const std::string& feature_key, const std::string& member) const {
        return smoothed_cond_prob(features.at(feature_key), member);
    }

    // Reduces a matched feature set to (relatively) independent survivors:
    // among collocations with nested matched spans only the strongest lives,
    // and a context word duplicated inside a surviving collocation span is
    // dropped. Deterministic regardless of input order.
    std::vector<const FeatureEntry*> resolve_dependencies(
        const std::vector<const FeatureEntry*>& matched, const Sentence& sentence,
        std::size_t position) const {
        std::vector<const FeatureEntry*> collocations;
        std::vector<const FeatureEntry*> context_words;
        for (const FeatureEntry* entry : matched)
            (entry->feature.kind == Feature::Kind::Collocation ? collocations
                                                               : context_words)
                .push_back(entry);

        std::sort(collocations.begin(), collocations.end(),
                  [](const FeatureEntry* a, const FeatureEntry* b) {
                      if (a->strength != b->strength) return a->strength > b->strength;
                      if (a->feature.pattern.size() != b->feature.pattern.size())
                          return a->feature.pattern.size() > b->feature.pattern.size();
                      return a->feature.key() < b->feature.key();
                  });

        std::vector<const FeatureEntry*> kept_collocations;
        std::vector<std::vector<std::size_t>> kept_spans;
        for (const FeatureEntry* entry : collocations) {
            std::vector<std::size_t> span = entry->feature.span(position);
            bool nested = false;
            for (const auto& other : kept_spans) {
                const bool contains = std::includes(span.begin(), span.end(),
                                                    other.begin(), other.end());
                const bool contained = std::includes(other.begin(), other.end(),
                                                     span.begin(), span.end());
                if (contains || contained) {
                    nested = true;
                    break;
                }
            }
            if (!nested) {
                kept_collocations.push_back(entry);
                kept_spans.push_back(std::move(span));
            }
        }

        std::set<std::string> covered_words;
        for (const auto& span : kept_spans)
            for (std::size_t p : span) covered_words.insert(fold(sentence[p]));

        std::vector<const FeatureEntry*> result = kept_collocations;
        for (const FeatureEntry* entry : context_words)
            if (!covered_words.count(entry->feature.word)) result.push_back(entry);

        std::sort(result.begin(), result.end(),
                  [](const FeatureEntry* a, const FeatureEntry* b) {
                      return a->feature.key() < b->feature.key();
                  });
        return result;
    }

    // log P(member) + sum over the reduced feature set of
    // log P(feature | member); the common P(features) divisor is dropped.
    Posterior score(const Sentence& sentence, std::size_t position,
                    const TagDictionary& tag_dictionary) const {
        std::vector<const FeatureEntry*> matched;
        for (const Feature& f : match_features(sentence, position, config, tag_dictionary)) {
            auto it = features.find(f.key());
            if (it != features.end()) matched.push_back(&it->second);
        }
        std::vector<const FeatureEntry*> reduced =
            resolve_dependencies(matched, sentence, position);

        Posterior posterior;
        for (const FeatureEntry* entry : reduced)
            posterior.used_features.push_back(entry->feature.key());
        for (const std::string& member : set.words) {
            double lp = log_of(prior(member));
            for (const FeatureEntry* entry : reduced)
                lp += log_of(smoothed_cond_prob(*entry, member));
            posterior.log_scores[member] = lp;
        }
        return posterior;
    }

    std::string predict(const Sentence& sentence, std::size_t position,
                        const TagDictionary& tag_dictionary) const {
        const Posterior posterior = score(sentence, position, tag_dictionary);
        const std::string original = fold(sentence[position]);
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
};

// Occurrence filter for hybrid training; null means train on everything.
using OccurrenceFilter = std::function<bool(const Occurrence&)>;

// Two passes over the (filtered) occurrences: the first proposes the feature
// space, expressing each neighbor as its literal word or its gold tag; the
// second counts, for every proposed feature, the occurrences of each member
// it matches, using tag-set matching exactly as at prediction time.
inline BayesModel train_bayes(const TaggedCorpus& train, const ConfusionSet& set,
                              const BayesConfig& config,
                              const OccurrenceFilter& filter = nullptr) {
    config.validate();
    BayesModel model;
    model.set = set;
    model.config = config;
    for (const std::string& member : set.words) model.occurrence_counts[member] = 0;

    std::vector<Occurrence> occurrences;
    for (const Occurrence& occ : find_occurrences(train, set))
        if (!filter || filter(occ)) occurrences.push_back(occ);

    if (occurrences.empty()) {
        model.prior_only = true;
        return model;
    }

    for (const Occurrence& occ : occurrences) {
        const TaggedSentence& tagged = train.sentences[occ.sentence_index];
        ++model.occurrence_counts[fold(tagged[occ.position].surface)];
        ++model.total_occurrences;

        if (config.use_context_words) {
            const int len = static_cast<int>(tagged.size());
            const int pos = static_cast<int>(occ.position);
            std::set<std::string> seen;
            for (int p = pos - config.context_window; p <= pos + config.context_window; ++p) {
                if (p < 0 || p >= len || p == pos) continue;
                seen.insert(fold(tagged[static_cast<std::size_t>(p)].surface));
            }
            for (const std::string& word : seen) {
                Feature f;
                f.kind = Feature::Kind::ContextWord;
                f.word = word;
                std::string key = f.key();
                model.features.try_emplace(std::move(key),
                                           FeatureEntry{std::move(f), {}, 0, 0.0});
            }
        }

        const int len = static_cast<int>(tagged.size());
        const int pos = static_cast<int>(occ.position);
        for (int total = 1; total <= config.max_collocation_len; ++total) {
            for (int left = 0; left <= total; ++left) {
                const int right = total - left;
                if (pos - left < 0 || pos + right >= len) continue;
                // Every literal/tag combination of the window's elements.
                for (unsigned mask = 0; mask < (1u << total); ++mask) {
                    Feature f;
                    f.kind = Feature::Kind::Collocation;
                    f.left_len = left;
                    for (int i = 0; i < total; ++i) {
                        int offset = i < left ? i - left : i - left + 1;
                        const TaggedToken& neighbor =
                            tagged[static_cast<std::size_t>(pos + offset)];
                        if (mask & (1u << i))
                            f.pattern.push_back({true, neighbor.tag});
                        else
                            f.pattern.push_back({false, fold(neighbor.surface)});
                    }
                    std::string key = f.key();
                    model.features.try_emplace(std::move(key),
                                               FeatureEntry{std::move(f), {}, 0, 0.0});
                }
            }
        }
    }

    for (const Occurrence& occ : occurrences) {
        const TaggedSentence& tagged = train.sentences[occ.sentence_index];
        const Sentence surfaces = strip_tags(tagged);
        const std::string member = fold(tagged[occ.position].surface);
        for (const Feature& f :
             match_features(surfaces, occ.position, config, train.tag_dictionary)) {
            auto it = model.features.find(f.key());
            if (it == model.features.end()) continue;
            ++it->second.member_matches[member];
            ++it->second.total_matches;
        }
    }

    // Pruning. Context words need at least 2 occurrences and 2 non-occurrences;
    // collocations additionally need to discriminate beyond the priors.
    for (auto it = model.features.begin(); it != model.features.end();) {
        const FeatureEntry& entry = it->second;
        bool drop = false;
        if (entry.feature.kind == Feature::Kind::ContextWord) {
            drop = entry.total_matches < 2 ||
                   model.total_occurrences - entry.total_matches < 2;
        } else {
            if (entry.total_matches < config.min_feature_support) {
                drop = true;
            } else {
                double max_deviation = 0.0;
                for (const std::string& member : set.words) {
                    auto mit = entry.member_matches.find(member);
                    const std::int64_t matches =
                        mit == entry.member_matches.end() ? 0 : mit->second;
                    const double mle = static_cast<double>(matches) /
                                       static_cast<double>(entry.total_matches);
                    max_deviation =
                        std::max(max_deviation, std::abs(mle - model.prior(member)));
                }
                drop = max_deviation < config.min_discrimination;
            }
        }
        it = drop ? model.features.erase(it) : std::next(it);
    }

    // Strength: the normalized posterior reliability of the feature's best
    // member, used to rank collocations during dependency resolution.
    for (auto& [key, entry] : model.features) {
        double best = 0.0, norm = 0.0;
        for (const std::string& member : set.words) {
            double s = model.smoothed_cond_prob(entry, member) * model.prior(member);
            best = std::max(best, s);
            norm += s;
        }
        entry.strength = norm > 0.0 ? best / norm : 0.0;
    }
    return model;
}

}  // namespace ctxspell
