#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ctxspell/corpus.hpp"
#include "ctxspell/text.hpp"
#include "ctxspell/tribayes.hpp"

namespace ctxspell {

// The context-blind reference method: always answer the member seen most
// often in training.
struct BaselinePriors {
    std::map<std::string, std::int64_t> counts;
    std::string most_frequent;
};

inline BaselinePriors make_baseline(const ConfusionSet& set,
                                    const std::map<std::string, std::int64_t>& counts) {
    BaselinePriors priors;
    for (const std::string& member : set.words) {
        auto it = counts.find(member);
        priors.counts[member] = it == counts.end() ? 0 : it->second;
    }
    std::int64_t best = -1;
    for (const auto& [member, count] : priors.counts) {  // alphabetical
        if (count > best) {
            priors.most_frequent = member;
            best = count;
        }
    }
    return priors;
}

inline BaselinePriors train_baseline(const TaggedCorpus& train, const ConfusionSet& set) {
    std::map<std::string, std::int64_t> counts;
    for (const Occurrence& occ : find_occurrences(train, set))
        ++counts[fold(train.sentences[occ.sentence_index][occ.position].surface)];
    return make_baseline(set, counts);
}

inline const std::string& predict_baseline(const BaselinePriors& priors) {
    return priors.most_frequent;
}

using Predictor = std::function<std::string(const Sentence&, std::size_t)>;
using SameTagFn = std::function<bool(const Sentence&, std::size_t)>;
using Suggester = std::function<std::optional<Suggestion>(const Sentence&, std::size_t)>;

struct ConditionCounts {
    std::int64_t n = 0;
    std::int64_t correct = 0;

    double percent() const {
        return n == 0 ? 0.0 : 100.0 * static_cast<double>(correct) / static_cast<double>(n);
    }
};

struct AccuracyResult {
    ConditionCounts overall;
    ConditionCounts different_tag;
    ConditionCounts same_tag;
};

// Scores a predictor over every test occurrence of a set member. The gold
// word stays in the sentence surface (the predictor only sees surfaces, never
// tags) and a prediction is correct iff it names the gold member. Each
// occurrence is also binned by the dispatch-visible same-tag flag.
inline AccuracyResult evaluate_accuracy(const TaggedCorpus& test, const ConfusionSet& set,
                                        const Predictor& predictor,
                                        const SameTagFn& same_tag) {
    AccuracyResult result;
    for (const Occurrence& occ : find_occurrences(test, set)) {
        const TaggedSentence& tagged = test.sentences[occ.sentence_index];
        const Sentence sentence = strip_tags(tagged);
        const std::string gold = fold(tagged[occ.position].surface);
        const bool correct = fold(predictor(sentence, occ.position)) == gold;
        ConditionCounts& bin =
            same_tag(sentence, occ.position) ? result.same_tag : result.different_tag;
        ++result.overall.n;
        ++bin.n;
        if (correct) {
            ++result.overall.correct;
            ++bin.correct;
        }
    }
    return result;
}

struct TwoConditionResult {
    ConditionCounts correct_condition;    // unmodified text must stay untouched
    ConditionCounts corrupted_condition;  // planted errors must be restored
};

// The two-sided protocol: on correct text an instance passes iff no
// unsuppressed suggestion changes it; on corrupted text an instance passes
// iff an unsuppressed suggestion restores exactly the intended word.
inline TwoConditionResult evaluate_two_conditions(const TaggedCorpus& test,
                                                  const ConfusionSet& set,
                                                  const Suggester& suggester) {
    TwoConditionResult result;
    for (const Occurrence& occ : find_occurrences(test, set)) {
        const Sentence sentence = strip_tags(test.sentences[occ.sentence_index]);
        std::optional<Suggestion> suggestion = suggester(sentence, occ.position);
        ++result.correct_condition.n;
        if (!suggestion || suggestion->suppressed) ++result.correct_condition.correct;
    }
    for (const CorruptedInstance& instance : generate_corrupted(test, set)) {
        std::optional<Suggestion> suggestion =
            suggester(instance.sentence, instance.position);
        ++result.corrupted_condition.n;
        if (suggestion && !suggestion->suppressed &&
            suggestion->suggested == instance.intended)
            ++result.corrupted_condition.correct;
    }
    return result;
}

struct MethodCell {
    bool computed = false;
    ConditionCounts overall;
    ConditionCounts different_tag;
    ConditionCounts same_tag;

    static MethodCell from(const AccuracyResult& acc) {
        return {true, acc.overall, acc.different_tag, acc.same_tag};
    }
};

struct SetReport {
    std::string set_id;
    std::int64_t train_occurrences = 0;
    std::int64_t test_occurrences = 0;
    MethodCell base, trigrams, bayes, tribayes;
    bool conditions_computed = false;
    ConditionCounts correct_condition;
    ConditionCounts corrupted_condition;
};

struct EvaluationReport {
    std::vector<SetReport> rows;

    std::string to_tsv() const;
    std::string to_table() const;
};

namespace detail {

inline std::string percent_cell(const ConditionCounts& counts, bool computed) {
    if (!computed || counts.n == 0) return "-";
    return format_fixed1(counts.percent());
}

// Bin sizes are shared across methods; read them off any computed cell.
inline const MethodCell* first_computed(const SetReport& row) {
    for (const MethodCell* cell : {&row.base, &row.trigrams, &row.bayes, &row.tribayes})
        if (cell->computed) return cell;
    return nullptr;
}

inline std::vector<std::string> report_header() {
    return {"set",       "train",     "test",      "base",      "trigrams",
            "bayes",     "tribayes",  "diff_pct",  "diff_base", "diff_trigrams",
            "diff_bayes", "diff_tribayes", "same_pct", "same_base", "same_trigrams",
            "same_bayes", "same_tribayes", "correct",  "corrupted"};
}

inline std::vector<std::string> report_row(const SetReport& row) {
    std::vector<std::string> cells;
    cells.push_back(row.set_id);
    cells.push_back(std::to_string(row.train_occurrences));
    cells.push_back(std::to_string(row.test_occurrences));
    cells.push_back(percent_cell(row.base.overall, row.base.computed));
    cells.push_back(percent_cell(row.trigrams.overall, row.trigrams.computed));
    cells.push_back(percent_cell(row.bayes.overall, row.bayes.computed));
    cells.push_back(percent_cell(row.tribayes.overall, row.tribayes.computed));

    const MethodCell* bins = first_computed(row);
    if (bins && bins->overall.n > 0) {
        const double total = static_cast<double>(bins->overall.n);
        cells.push_back(format_fixed1(100.0 * static_cast<double>(bins->different_tag.n) / total));
        cells.push_back(percent_cell(row.base.different_tag, row.base.computed));
        cells.push_back(percent_cell(row.trigrams.different_tag, row.trigrams.computed));
        cells.push_back(percent_cell(row.bayes.different_tag, row.bayes.computed));
        cells.push_back(percent_cell(row.tribayes.different_tag, row.tribayes.computed));
        cells.push_back(format_fixed1(100.0 * static_cast<double>(bins->same_tag.n) / total));
        cells.push_back(percent_cell(row.base.same_tag, row.base.computed));
        cells.push_back(percent_cell(row.trigrams.same_tag, row.trigrams.computed));
        cells.push_back(percent_cell(row.bayes.same_tag, row.bayes.computed));
        cells.push_back(percent_cell(row.tribayes.same_tag, row.tribayes.computed));
    } else {
        for (int i = 0; i < 10; ++i) cells.push_back("-");
    }

    cells.push_back(percent_cell(row.correct_condition, row.conditions_computed));
    cells.push_back(percent_cell(row.corrupted_condition, row.conditions_computed));
    return cells;
}

}  // namespace detail

inline std::string EvaluationReport::to_tsv() const {
    std::string out = join(detail::report_header(), "\t") + "\n";
    for (const SetReport& row : rows) out += join(detail::report_row(row), "\t") + "\n";
    return out;
}

inline std::string EvaluationReport::to_table() const {
    std::vector<std::vector<std::string>> grid;
    grid.push_back(detail::report_header());
    for (const SetReport& row : rows) grid.push_back(detail::report_row(row));

    std::vector<std::size_t> widths(grid[0].size(), 0);
    for (const auto& cells : grid)
        for (std::size_t i = 0; i < cells.size(); ++i)
            widths[i] = std::max(widths[i], cells[i].size());

    std::string out;
    for (const auto& cells : grid) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i > 0) out += "  ";
            if (i == 0) {
                out += cells[i];
                out.append(widths[i] - cells[i].size(), ' ');
            } else {
                out.append(widths[i] - cells[i].size(), ' ');
                out += cells[i];
            }
        }
        out += '\n';
    }
    return out;
}

}  // namespace ctxspell
