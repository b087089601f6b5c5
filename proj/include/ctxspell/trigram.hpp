#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "ctxspell/corpus.hpp"
#include "ctxspell/error.hpp"
#include "ctxspell/logprob.hpp"
#include "ctxspell/text.hpp"

namespace ctxspell {

// Synthetic boundary tags: two starts pad each sentence, one end closes it.
// The end transition is part of the tag-sequence probability, which makes the
// interpolated transition distribution sum to one over inventory + end tag.
inline const std::string kStartTag = "<s>";
inline const std::string kEndTag = "</s>";

inline const std::set<std::string> kDefaultSelfTagged = {
    "except", "than", "then", "to", "too", "whether"};

struct TrigramConfig {
    double trigram_weight = 0.7;
    double bigram_weight = 0.2;
    double unigram_weight = 0.1;
    double unknown_emission_mass = 1e-6;
    std::int64_t open_class_min_words = 20;
    std::set<std::string> self_tagged = kDefaultSelfTagged;

    void validate() const {
        if (trigram_weight < 0 || bigram_weight < 0 || unigram_weight < 0 ||
            std::abs(trigram_weight + bigram_weight + unigram_weight - 1.0) > 1e-9)
            throw config_error("interpolation weights must be >= 0 and sum to 1");
        if (unknown_emission_mass <= 0 || unknown_emission_mass >= 1)
            throw config_error("unknown_emission_mass must be in (0,1)");
        if (open_class_min_words < 1)
            throw config_error("open_class_min_words must be >= 1");
    }
};

struct TrigramModel {
    TrigramConfig config;

    using Trigram = std::tuple<std::string, std::string, std::string>;
    using Bigram = std::pair<std::string, std::string>;

    std::map<Trigram, std::int64_t> trigram_counts;          // (a, b, t)
    std::map<Bigram, std::int64_t> trigram_context_counts;   // (a, b)
    std::map<Bigram, std::int64_t> bigram_counts;            // (b, t)
    std::map<std::string, std::int64_t> bigram_context_counts;  // (b)
    std::map<std::string, std::int64_t> unigram_counts;  // continuations incl. end tag
    std::int64_t total_events = 0;

    std::map<Bigram, std::int64_t> emission_counts;  // (folded word, t)
    std::map<std::string, std::set<std::string>> tag_dictionary;  // folded word
    std::set<std::string> tag_inventory;  // tags seen on tokens (self-tags included)
    std::set<std::string> open_class;     // tags observed with many distinct words

    // lambda3 * MLE(t|a,b) + lambda2 * MLE(t|b) + lambda1 * MLE(t), with
    // unseen-context terms contributing zero.
    double transition_prob(const std::string& a, const std::string& b,
                           const std::string& t) const {
        double p = 0.0;
        if (auto ctx = trigram_context_counts.find({a, b});
            ctx != trigram_context_counts.end()) {
            auto it = trigram_counts.find({a, b, t});
            std::int64_t c = it == trigram_counts.end() ? 0 : it->second;
            p += config.trigram_weight * static_cast<double>(c) /
                 static_cast<double>(ctx->second);
        }
        if (auto ctx = bigram_context_counts.find(b); ctx != bigram_context_counts.end()) {
            auto it = bigram_counts.find({b, t});
            std::int64_t c = it == bigram_counts.end() ? 0 : it->second;
            p += config.bigram_weight * static_cast<double>(c) /
                 static_cast<double>(ctx->second);
        }
        if (total_events > 0) {
            auto it = unigram_counts.find(t);
            std::int64_t c = it == unigram_counts.end() ? 0 : it->second;
            p += config.unigram_weight * static_cast<double>(c) /
                 static_cast<double>(total_events);
        }
        return p;
    }

    double emission_prob(std::string_view word, const std::string& t) const {
        std::string folded = fold(word);
        auto dict = tag_dictionary.find(folded);
        if (dict == tag_dictionary.end())
            return open_class.count(t) ? config.unknown_emission_mass : 0.0;
        if (!dict->second.count(t)) return 0.0;
        auto em = emission_counts.find({folded, t});
        auto tot = unigram_counts.find(t);
        return static_cast<double>(em->second) / static_cast<double>(tot->second);
    }

    // Candidate tags at inference: observed tags for known words, the
    // open-class set for unknown ones.
    const std::set<std::string>& candidate_tags(std::string_view word) const {
        auto dict = tag_dictionary.find(fold(word));
        return dict == tag_dictionary.end() ? open_class : dict->second;
    }

    // Per-position transition terms, hoisted out of the state loop. For each
    // candidate tag the unigram term is fixed, the bigram term depends only
    // on the previous tag, and only the trigram term needs the full context.
    // The addition order matches transition_prob exactly, so results are
    // bit-identical to calling it per (context, tag).
    struct PositionTerms {
        std::vector<const std::string*> tags;
        std::vector<double> unigram_term;
        mutable std::map<std::string, std::vector<double>> bigram_terms;  // by prev tag

        const std::vector<double>& bigram_for(const TrigramModel& model,
                                              const std::string& prev) const {
            auto it = bigram_terms.find(prev);
            if (it != bigram_terms.end()) return it->second;
            std::vector<double> terms(tags.size(), 0.0);
            if (auto ctx = model.bigram_context_counts.find(prev);
                ctx != model.bigram_context_counts.end()) {
                for (std::size_t k = 0; k < tags.size(); ++k) {
                    auto bit = model.bigram_counts.find({prev, *tags[k]});
                    std::int64_t c = bit == model.bigram_counts.end() ? 0 : bit->second;
                    terms[k] = model.config.bigram_weight * static_cast<double>(c) /
                               static_cast<double>(ctx->second);
                }
            }
            return bigram_terms.emplace(prev, std::move(terms)).first->second;
        }

        double transition(const TrigramModel& model, const std::string& a,
                          const std::string& b, std::size_t k, double ctx3_total,
                          const std::vector<double>& bigram) const {
            double p = 0.0;
            if (ctx3_total > 0) {
                auto it = model.trigram_counts.find({a, b, *tags[k]});
                std::int64_t c = it == model.trigram_counts.end() ? 0 : it->second;
                p += model.config.trigram_weight * static_cast<double>(c) / ctx3_total;
            }
            p += bigram[k];
            p += unigram_term[k];
            return p;
        }
    };

    PositionTerms position_terms(const std::string& word, bool skip_zero_emissions,
                                 std::vector<double>* emission_logs) const {
        PositionTerms terms;
        for (const std::string& t : candidate_tags(word)) {
            const double emit = emission_prob(word, t);
            if (skip_zero_emissions && emit <= 0.0) continue;
            terms.tags.push_back(&t);
            if (emission_logs) emission_logs->push_back(log_of(emit));
            auto it = unigram_counts.find(t);
            std::int64_t c = it == unigram_counts.end() ? 0 : it->second;
            terms.unigram_term.push_back(
                total_events > 0 ? config.unigram_weight * static_cast<double>(c) /
                                       static_cast<double>(total_events)
                                 : 0.0);
        }
        return terms;
    }

    // log sum over all tag sequences of P(W,T), by the forward algorithm over
    // (prev, current) tag states. Returns kLogZero when no tagging has
    // positive probability.
    double sentence_log_prob(const Sentence& sentence) const {
        std::map<std::pair<std::string, std::string>, double> alpha;
        alpha[{kStartTag, kStartTag}] = 0.0;
        for (const std::string& word : sentence) {
            std::vector<double> emission_logs;
            const PositionTerms terms = position_terms(word, true, &emission_logs);
            std::map<std::pair<std::string, std::string>, double> next;
            for (const auto& [state, lp] : alpha) {
                const auto& [a, b] = state;
                auto ctx3 = trigram_context_counts.find({a, b});
                const double ctx3_total =
                    ctx3 == trigram_context_counts.end()
                        ? 0.0
                        : static_cast<double>(ctx3->second);
                const std::vector<double>& bigram = terms.bigram_for(*this, b);
                for (std::size_t k = 0; k < terms.tags.size(); ++k) {
                    const double trans = terms.transition(*this, a, b, k, ctx3_total, bigram);
                    if (trans <= 0.0) continue;
                    double contribution = lp + std::log(trans) + emission_logs[k];
                    auto [it, inserted] =
                        next.try_emplace(std::pair{b, *terms.tags[k]}, contribution);
                    if (!inserted) it->second = log_add(it->second, contribution);
                }
            }
            alpha = std::move(next);
            if (alpha.empty()) return kLogZero;
        }
        double total = kLogZero;
        for (const auto& [state, lp] : alpha) {
            double trans = transition_prob(state.first, state.second, kEndTag);
            if (trans > 0.0) total = log_add(total, lp + std::log(trans));
        }
        return total;
    }

    // Most probable tag sequence; exact score ties resolve to the
    // lexicographically smallest sequence. Throws when some token has an
    // empty candidate set. Paths are tracked as indices into each position's
    // sorted candidate list, so index order is tag order and comparing index
    // vectors is comparing tag sequences.
    std::vector<std::string> viterbi_tag(const Sentence& sentence) const {
        struct Cell {
            double score;
            std::vector<std::uint32_t> path;
        };
        std::vector<PositionTerms> all_terms;
        all_terms.reserve(sentence.size());

        std::map<std::pair<std::string, std::string>, Cell> best;
        best[{kStartTag, kStartTag}] = {0.0, {}};
        for (std::size_t pos = 0; pos < sentence.size(); ++pos) {
            const std::string& word = sentence[pos];
            std::vector<double> emission_logs;
            all_terms.push_back(position_terms(word, false, &emission_logs));
            const PositionTerms& terms = all_terms.back();
            if (terms.tags.empty())
                throw tagging_error("no candidate tags for token '" + word + "'", pos);
            std::map<std::pair<std::string, std::string>, Cell> next;
            for (const auto& [state, cell] : best) {
                const auto& [a, b] = state;
                auto ctx3 = trigram_context_counts.find({a, b});
                const double ctx3_total =
                    ctx3 == trigram_context_counts.end()
                        ? 0.0
                        : static_cast<double>(ctx3->second);
                const std::vector<double>& bigram = terms.bigram_for(*this, b);
                for (std::size_t k = 0; k < terms.tags.size(); ++k) {
                    const double trans = terms.transition(*this, a, b, k, ctx3_total, bigram);
                    double score = cell.score + log_of(trans) + emission_logs[k];
                    auto [it, inserted] = next.try_emplace(std::pair{b, *terms.tags[k]});
                    const bool better =
                        inserted || score > it->second.score ||
                        (score == it->second.score &&
                         [&] {
                             std::vector<std::uint32_t> candidate = cell.path;
                             candidate.push_back(static_cast<std::uint32_t>(k));
                             return candidate < it->second.path;
                         }());
                    if (better) {
                        std::vector<std::uint32_t> path = cell.path;
                        path.push_back(static_cast<std::uint32_t>(k));
                        it->second = {score, std::move(path)};
                    }
                }
            }
            best = std::move(next);
        }
        const Cell* final_best = nullptr;
        double final_score = kLogZero;
        for (const auto& [state, cell] : best) {
            double score = cell.score + log_of(transition_prob(state.first, state.second, kEndTag));
            if (!final_best || score > final_score ||
                (score == final_score && cell.path < final_best->path)) {
                final_best = &cell;
                final_score = score;
            }
        }
        if (!final_best)
            throw tagging_error("no candidate tags for empty sentence", 0);
        std::vector<std::string> tags;
        tags.reserve(final_best->path.size());
        for (std::size_t pos = 0; pos < final_best->path.size(); ++pos)
            tags.push_back(*all_terms[pos].tags[final_best->path[pos]]);
        return tags;
    }
};

inline TrigramModel train_trigram(const TaggedCorpus& corpus, const TrigramConfig& config) {
    config.validate();
    if (corpus.empty()) throw config_error("cannot train a trigram model on an empty corpus");

    TrigramModel model;
    model.config = config;
    for (const TaggedSentence& sentence : corpus.sentences) {
        std::vector<std::string> folded_words;
        std::vector<std::string> tags;
        folded_words.reserve(sentence.size());
        tags.reserve(sentence.size());
        for (const TaggedToken& token : sentence) {
            std::string folded = fold(token.surface);
            // Function words on the self-tagged list carry themselves as tag,
            // which lets the transition model tell them apart.
            tags.push_back(config.self_tagged.count(folded) ? folded : token.tag);
            folded_words.push_back(std::move(folded));
        }

        std::string prev2 = kStartTag, prev1 = kStartTag;
        for (std::size_t i = 0; i <= sentence.size(); ++i) {
            const std::string& t = i < sentence.size() ? tags[i] : kEndTag;
            ++model.trigram_counts[{prev2, prev1, t}];
            ++model.trigram_context_counts[{prev2, prev1}];
            ++model.bigram_counts[{prev1, t}];
            ++model.bigram_context_counts[prev1];
            ++model.unigram_counts[t];
            ++model.total_events;
            if (i < sentence.size()) {
                ++model.emission_counts[{folded_words[i], t}];
                model.tag_dictionary[folded_words[i]].insert(t);
                model.tag_inventory.insert(t);
            }
            prev2 = prev1;
            prev1 = t;
        }
    }

    std::map<std::string, std::int64_t> distinct_words;
    for (const auto& [key, count] : model.emission_counts) ++distinct_words[key.second];
    for (const auto& [tag, words] : distinct_words)
        if (words >= config.open_class_min_words) model.open_class.insert(tag);
    return model;
}

struct ScoredCandidate {
    std::string word;  // lowercase member (possibly multi-token)
    double log_prob_per_word = kLogZero;
    std::string viterbi_tag_at_target;  // empty when some token is untaggable

    bool zero_probability() const { return is_log_zero(log_prob_per_word); }
};

namespace detail {

inline Sentence substitute(const Sentence& sentence, std::size_t position,
                           const std::string& candidate) {
    Sentence out;
    out.reserve(sentence.size() + 1);
    for (std::size_t i = 0; i < sentence.size(); ++i) {
        if (i == position) {
            for (std::string& part : split_whitespace(candidate)) out.push_back(std::move(part));
        } else {
            out.push_back(sentence[i]);
        }
    }
    return out;
}

}  // namespace detail

// Substitutes every confusion-set member (plus the original word) into the
// sentence and scores each variant by the per-word geometric mean of its
// sentence probability, so members of different token lengths compare fairly.
inline std::vector<ScoredCandidate> score_substitutions(const TrigramModel& model,
                                                        const Sentence& sentence,
                                                        std::size_t position,
                                                        const ConfusionSet& set) {
    const std::string original = fold(sentence[position]);
    std::vector<std::string> candidates = set.words;
    if (std::find(candidates.begin(), candidates.end(), original) == candidates.end())
        candidates.push_back(original);

    std::vector<ScoredCandidate> scored;
    scored.reserve(candidates.size());
    for (const std::string& candidate : candidates) {
        Sentence variant = detail::substitute(sentence, position, candidate);
        ScoredCandidate sc;
        sc.word = candidate;
        double lp = model.sentence_log_prob(variant);
        sc.log_prob_per_word = is_log_zero(lp)
                                   ? kLogZero
                                   : lp / static_cast<double>(variant.size());
        bool taggable = true;
        for (const std::string& word : variant) {
            if (model.candidate_tags(word).empty()) {
                taggable = false;
                break;
            }
        }
        if (taggable) sc.viterbi_tag_at_target = model.viterbi_tag(variant)[position];
        scored.push_back(std::move(sc));
    }

    std::sort(scored.begin(), scored.end(),
              [&original](const ScoredCandidate& a, const ScoredCandidate& b) {
                  if (a.log_prob_per_word != b.log_prob_per_word)
                      return a.log_prob_per_word > b.log_prob_per_word;
                  if ((a.word == original) != (b.word == original))
                      return a.word == original;
                  return a.word < b.word;
              });
    return scored;
}

struct TrigramPrediction {
    std::string predicted;
    bool same_tag = false;
    std::vector<ScoredCandidate> candidates;  // best first
};

inline TrigramPrediction predict_trigrams(const TrigramModel& model,
                                          const Sentence& sentence, std::size_t position,
                                          const ConfusionSet& set) {
    TrigramPrediction out;
    out.candidates = score_substitutions(model, sentence, position, set);
    out.predicted = out.candidates.front().word;
    out.same_tag = true;
    for (const ScoredCandidate& sc : out.candidates) {
        if (sc.viterbi_tag_at_target != out.candidates.front().viterbi_tag_at_target) {
            out.same_tag = false;
            break;
        }
    }
    return out;
}

}  // namespace ctxspell
