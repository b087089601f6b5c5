#pragma once

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ctxspell/config.hpp"
#include "ctxspell/corpus.hpp"
#include "ctxspell/error.hpp"
#include "ctxspell/evaluation.hpp"
#include "ctxspell/model_io.hpp"
#include "ctxspell/system.hpp"
#include "ctxspell/text.hpp"

namespace ctxspell {
namespace cli {

// Exit codes: 0 success, 1 usage or configuration error, 2 I/O or parse
// error, 3 evaluation ran but some configured set had no test occurrences.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitIo = 2;
inline constexpr int kExitEvalMisconfigured = 3;

inline std::string read_file(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw io_error("cannot open " + path);
    std::ostringstream buffer;
    buffer << file.rdbuf();
    if (file.bad()) throw io_error("read failed: " + path);
    return buffer.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw io_error("cannot open " + path + " for writing");
    file << content;
    if (!file.good()) throw io_error("write failed: " + path);
}

struct TokenSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
};

inline std::vector<TokenSpan> token_spans(std::string_view line) {
    std::vector<TokenSpan> spans;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r'))
            ++i;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r')
            ++i;
        if (i > start) spans.push_back({start, i});
    }
    return spans;
}

namespace detail {

struct CommonOptions {
    std::string config_path;
    std::vector<std::string> overrides;  // key=value from the command line
};

inline void add_common(CLI::App* cmd, CommonOptions& options) {
    cmd->add_option("--config", options.config_path, "key=value configuration file");
    cmd->add_option("--set-option", options.overrides,
                    "override a single configuration key (key=value)");
}

inline RunConfig build_config(const CommonOptions& options) {
    RunConfig config;
    if (!options.config_path.empty()) {
        std::istringstream in(read_file(options.config_path));
        parse_config_stream(in, config);
    }
    for (const std::string& override_kv : options.overrides) {
        std::size_t eq = override_kv.find('=');
        if (eq == std::string::npos)
            throw config_error("expected key=value, got: " + override_kv);
        set_config_option(config, trim(override_kv.substr(0, eq)),
                          trim(override_kv.substr(eq + 1)));
    }
    return config;
}

inline SystemModel load_model_file(const std::string& path) {
    std::istringstream in(read_file(path));
    try {
        return load_model(in);
    } catch (const parse_error& e) {
        throw parse_error(path + ": " + e.what());
    }
}

// Per-(sentence, position) memo so every method shares one trigram scoring
// pass per target. Identical sentences legitimately share entries.
class TrigramMemo {
public:
    TrigramMemo(const TrigramModel& model, const ConfusionSet& set)
        : model_(model), set_(set) {}

    const TrigramPrediction& get(const Sentence& sentence, std::size_t position) {
        std::string key = join(sentence, " ") + "\x1f" + std::to_string(position);
        auto it = memo_.find(key);
        if (it == memo_.end())
            it = memo_.emplace(std::move(key),
                               predict_trigrams(model_, sentence, position, set_)).first;
        return it->second;
    }

private:
    const TrigramModel& model_;
    const ConfusionSet& set_;
    std::map<std::string, TrigramPrediction> memo_;
};

struct MethodSelection {
    bool base = false;
    bool trigrams = false;
    bool bayes = false;
    bool tribayes = false;
};

inline MethodSelection parse_methods(const std::string& value) {
    MethodSelection sel;
    for (const std::string& raw : split_char(value, ',')) {
        std::string name = fold(trim(raw));
        if (name == "all") sel.base = sel.trigrams = sel.bayes = sel.tribayes = true;
        else if (name == "base") sel.base = true;
        else if (name == "trigrams") sel.trigrams = true;
        else if (name == "bayes") sel.bayes = true;
        else if (name == "tribayes") sel.tribayes = true;
        else throw config_error("unknown method: " + name);
    }
    return sel;
}

}  // namespace detail

inline int cmd_train(const std::string& corpus_path, const std::string& sets_path,
                     const std::string& output_path, const detail::CommonOptions& common,
                     std::optional<std::uint64_t> seed, bool holdout,
                     const std::string& test_out_path, std::ostream& out) {
    RunConfig config = detail::build_config(common);
    if (seed) config.seed = *seed;
    config.validate();

    const std::string corpus_bytes = read_file(corpus_path);
    TaggedCorpus corpus;
    try {
        corpus = parse_tagged_corpus(corpus_bytes);
    } catch (const parse_error& e) {
        throw parse_error(corpus_path + ": " + e.what());
    }
    std::vector<ConfusionSet> sets;
    try {
        std::istringstream in(read_file(sets_path));
        sets = parse_confusion_sets(in);
    } catch (const parse_error& e) {
        throw parse_error(sets_path + ": " + e.what());
    }

    TaggedCorpus train = corpus;
    if (holdout) {
        auto [train_part, test_part] =
            split_corpus(corpus, {config.train_fraction, config.seed});
        train = std::move(train_part);
        if (!test_out_path.empty())
            write_file(test_out_path, serialize_tagged_corpus(test_part));
    }

    SystemModel system = train_system(train, sets, config);
    system.corpus_digest = fnv1a64_hex(corpus_bytes);
    system.holdout = holdout;
    write_file(output_path, save_model(system));

    out << "trained on " << train.sentences.size() << " sentences ("
        << train.tag_inventory.size() << " tags)\n";
    for (const std::string& id : system.set_order) {
        out << "train-occurrences\t" << id << "\t"
            << system.sets.at(id).total_train_occurrences() << "\n";
    }
    return kExitOk;
}

inline int cmd_evaluate(const std::string& model_path, const std::string& test_path,
                        const std::string& method_value, bool corrupted, bool thresholded,
                        const std::string& output_path, std::ostream& out,
                        std::ostream& err) {
    const SystemModel system = detail::load_model_file(model_path);
    TaggedCorpus test;
    try {
        test = parse_tagged_corpus(read_file(test_path));
    } catch (const parse_error& e) {
        throw parse_error(test_path + ": " + e.what());
    }
    const detail::MethodSelection methods = detail::parse_methods(method_value);

    const ThresholdModel active_thresholds =
        thresholded ? system.thresholds : make_uniform_thresholds(system.set_order, 0.0);

    EvaluationReport report;
    bool any_empty = false;
    for (const std::string& id : system.set_order) {
        const PerSetModel& per_set = system.sets.at(id);
        detail::TrigramMemo memo(system.trigram, per_set.set);
        const SameTagFn same_tag = [&](const Sentence& sentence, std::size_t position) {
            return memo.get(sentence, position).same_tag;
        };

        SetReport row;
        row.set_id = id;
        row.train_occurrences = per_set.total_train_occurrences();
        row.test_occurrences =
            static_cast<std::int64_t>(find_occurrences(test, per_set.set).size());
        if (row.test_occurrences == 0) {
            err << "warning: no test occurrences for set " << id << "\n";
            any_empty = true;
        }

        if (methods.base) {
            const BaselinePriors priors = make_baseline(per_set.set, per_set.full_counts);
            row.base = MethodCell::from(evaluate_accuracy(
                test, per_set.set,
                [&](const Sentence&, std::size_t) { return predict_baseline(priors); },
                same_tag));
        }
        if (methods.trigrams) {
            row.trigrams = MethodCell::from(evaluate_accuracy(
                test, per_set.set,
                [&](const Sentence& sentence, std::size_t position) {
                    return memo.get(sentence, position).predicted;
                },
                same_tag));
        }
        if (methods.bayes) {
            row.bayes = MethodCell::from(evaluate_accuracy(
                test, per_set.set,
                [&](const Sentence& sentence, std::size_t position) {
                    return per_set.bayes.predict(sentence, position, system.tag_dictionary);
                },
                same_tag));
        }
        if (methods.tribayes) {
            row.tribayes = MethodCell::from(evaluate_accuracy(
                test, per_set.set,
                [&](const Sentence& sentence, std::size_t position) {
                    return predict_tribayes(system.trigram, per_set, system.tag_dictionary,
                                            sentence, position,
                                            &memo.get(sentence, position))
                        .predicted;
                },
                same_tag));
        }
        if (corrupted) {
            const Suggester suggester = [&](const Sentence& sentence, std::size_t position) {
                TribayesPrediction prediction =
                    predict_tribayes(system.trigram, per_set, system.tag_dictionary,
                                     sentence, position, &memo.get(sentence, position));
                std::optional<Suggestion> suggestion =
                    make_suggestion(prediction, sentence, 0, position);
                if (!suggestion) return suggestion;
                return std::optional<Suggestion>(
                    apply_threshold(active_thresholds, id, *suggestion));
            };
            TwoConditionResult conditions =
                evaluate_two_conditions(test, per_set.set, suggester);
            row.conditions_computed = true;
            row.correct_condition = conditions.correct_condition;
            row.corrupted_condition = conditions.corrupted_condition;
        }
        report.rows.push_back(std::move(row));
    }

    out << report.to_table();
    if (!output_path.empty()) write_file(output_path, report.to_tsv());
    return any_empty ? kExitEvalMisconfigured : kExitOk;
}

inline int cmd_correct(const std::string& model_path, const std::string& input_path,
                       bool suggest_only, bool show_suppressed,
                       std::optional<double> threshold_override,
                       const std::string& output_path, std::istream& in,
                       std::ostream& out) {
    const SystemModel system = detail::load_model_file(model_path);
    const std::vector<ConfusionSet> sets = system.confusion_sets();
    const ThresholdModel thresholds =
        threshold_override ? make_uniform_thresholds(system.set_order, *threshold_override)
                           : system.thresholds;

    std::string text;
    if (input_path.empty()) {
        std::ostringstream buffer;
        buffer << in.rdbuf();
        text = buffer.str();
    } else {
        text = read_file(input_path);
    }
    if (!utf8_valid(text)) throw parse_error("input is not valid UTF-8");

    const bool trailing_newline = !text.empty() && text.back() == '\n';
    std::vector<std::string> lines = split_char(text, '\n');
    if (trailing_newline) lines.pop_back();

    std::string rewritten;
    std::string listing;
    for (std::size_t line_index = 0; line_index < lines.size(); ++line_index) {
        const std::string& line = lines[line_index];
        const std::vector<TokenSpan> spans = token_spans(line);
        Sentence sentence;
        sentence.reserve(spans.size());
        for (const TokenSpan& span : spans)
            sentence.push_back(line.substr(span.begin, span.end - span.begin));

        std::map<std::size_t, Suggestion> accepted;  // position -> replacement
        for (const auto& [position, set] : find_targets(sentence, sets)) {
            if (accepted.count(position)) continue;  // first containing set wins
            std::optional<Suggestion> suggestion = suggest_at(
                system, thresholds, set->id, sentence, line_index + 1, position);
            if (!suggestion) continue;
            if (suggest_only && (show_suppressed || !suggestion->suppressed)) {
                listing += std::to_string(suggestion->sentence_index) + "\t" +
                           std::to_string(position) + "\t" + suggestion->original + "\t" +
                           suggestion->suggested + "\t" + format_double(suggestion->ratio) +
                           "\t" + method_name(suggestion->method) +
                           (suggestion->suppressed ? "\tsuppressed" : "") + "\n";
            }
            if (!suggestion->suppressed) accepted.emplace(position, *suggestion);
        }

        if (!suggest_only) {
            std::size_t cursor = 0;
            for (std::size_t t = 0; t < spans.size(); ++t) {
                rewritten.append(line, cursor, spans[t].begin - cursor);
                auto it = accepted.find(t);
                if (it == accepted.end()) {
                    rewritten.append(line, spans[t].begin, spans[t].end - spans[t].begin);
                } else {
                    rewritten += match_capitalization(it->second.original,
                                                      it->second.suggested);
                }
                cursor = spans[t].end;
            }
            rewritten.append(line, cursor, line.size() - cursor);
            if (line_index + 1 < lines.size() || trailing_newline) rewritten += '\n';
        }
    }

    const std::string& result = suggest_only ? listing : rewritten;
    if (output_path.empty())
        out << result;
    else
        write_file(output_path, result);
    return kExitOk;
}

inline int cmd_corrupt(const std::string& model_path, const std::string& sets_path,
                       const std::string& corpus_path, const std::string& output_path,
                       std::ostream& out) {
    std::vector<ConfusionSet> sets;
    if (!model_path.empty()) {
        sets = detail::load_model_file(model_path).confusion_sets();
    } else {
        std::istringstream in(read_file(sets_path));
        sets = parse_confusion_sets(in);
    }
    TaggedCorpus corpus;
    try {
        corpus = parse_tagged_corpus(read_file(corpus_path));
    } catch (const parse_error& e) {
        throw parse_error(corpus_path + ": " + e.what());
    }

    std::string result;
    for (const ConfusionSet& set : sets) {
        for (const CorruptedInstance& instance : generate_corrupted(corpus, set)) {
            result += join(instance.sentence, " ") + "\t" +
                      std::to_string(instance.position) + "\t" + instance.intended +
                      "\t" + instance.planted + "\n";
        }
    }
    if (output_path.empty())
        out << result;
    else
        write_file(output_path, result);
    return kExitOk;
}

inline int cmd_tune(const std::string& model_path, double steepness,
                    const std::string& output_path, std::ostream& out) {
    SystemModel system = detail::load_model_file(model_path);
    retune_thresholds(system, steepness);
    write_file(output_path.empty() ? model_path : output_path, save_model(system));
    for (const std::string& id : system.set_order)
        out << "threshold\t" << id << "\t"
            << format_double(system.thresholds.threshold_for(id)) << "\n";
    return kExitOk;
}

inline int run(std::vector<std::string> args, std::istream& in, std::ostream& out,
               std::ostream& err) {
    CLI::App app{"context-sensitive spelling correction over confusion sets"};
    app.require_subcommand(1);

    // train
    auto* train = app.add_subcommand("train", "train models from a tagged corpus");
    std::string train_corpus, train_sets, train_output = "model.txt", train_test_out;
    bool train_holdout = false;
    std::uint64_t train_seed = 0;
    detail::CommonOptions train_common;
    train->add_option("--corpus", train_corpus, "tagged corpus (word/TAG)")->required();
    train->add_option("--sets", train_sets, "confusion-set file")->required();
    train->add_option("--output", train_output, "model file to write");
    train->add_flag("--holdout", train_holdout,
                    "train on the train_fraction split only");
    train->add_option("--test-out", train_test_out,
                      "with --holdout, write the held-out corpus here");
    auto* seed_opt = train->add_option("--seed", train_seed, "split and sampling seed");
    detail::add_common(train, train_common);

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "score methods on a test corpus");
    std::string eval_model, eval_test, eval_method = "all", eval_output;
    bool eval_corrupted = false, eval_thresholded = false;
    evaluate->add_option("--model", eval_model, "trained model file")->required();
    evaluate->add_option("--test", eval_test, "tagged test corpus")->required();
    evaluate->add_option("--method", eval_method,
                         "base, trigrams, bayes, tribayes, or all");
    evaluate->add_flag("--corrupted", eval_corrupted,
                       "also run the correct/corrupted two-condition protocol");
    evaluate->add_flag("--thresholded", eval_thresholded,
                       "apply fitted suppression thresholds in the two-condition run");
    evaluate->add_option("--output", eval_output, "write the TSV report here");

    // correct
    auto* correct = app.add_subcommand("correct", "correct plain text");
    std::string correct_model, correct_input, correct_output;
    bool correct_suggest_only = false, correct_show_suppressed = false;
    double correct_threshold_override = 0.0;
    correct->add_option("--model", correct_model, "trained model file")->required();
    correct->add_option("--input", correct_input, "input text (default: stdin)");
    correct->add_option("--output", correct_output, "output path (default: stdout)");
    correct->add_flag("--suggest-only", correct_suggest_only,
                      "list suggestions instead of rewriting");
    correct->add_flag("--show-suppressed", correct_show_suppressed,
                      "with --suggest-only, include suppressed suggestions");
    auto* override_opt = correct->add_option("--threshold-override",
                                             correct_threshold_override,
                                             "replace all fitted thresholds");

    // corrupt
    auto* corrupt = app.add_subcommand("corrupt", "emit corrupted test instances");
    std::string corrupt_model, corrupt_sets, corrupt_corpus, corrupt_output;
    corrupt->add_option("--model", corrupt_model, "trained model file");
    corrupt->add_option("--sets", corrupt_sets, "confusion-set file");
    corrupt->add_option("--corpus", corrupt_corpus, "tagged corpus")->required();
    corrupt->add_option("--output", corrupt_output, "output path (default: stdout)");

    // tune
    auto* tune = app.add_subcommand("tune", "refit thresholds at a new steepness");
    std::string tune_model, tune_output;
    double tune_steepness = 0.5;
    tune->add_option("--model", tune_model, "trained model file")->required();
    tune->add_option("--steepness", tune_steepness, "threshold steepness in [0,1]")
        ->required();
    tune->add_option("--output", tune_output, "write here instead of in place");

    try {
        std::vector<const char*> argv;
        argv.push_back("ctxspell");
        for (const std::string& a : args) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (train->parsed()) {
            std::optional<std::uint64_t> seed;
            if (seed_opt->count() > 0) seed = train_seed;
            return cmd_train(train_corpus, train_sets, train_output, train_common, seed,
                             train_holdout, train_test_out, out);
        }
        if (evaluate->parsed())
            return cmd_evaluate(eval_model, eval_test, eval_method, eval_corrupted,
                                eval_thresholded, eval_output, out, err);
        if (correct->parsed()) {
            std::optional<double> override_value;
            if (override_opt->count() > 0) override_value = correct_threshold_override;
            return cmd_correct(correct_model, correct_input, correct_suggest_only,
                               correct_show_suppressed, override_value, correct_output,
                               in, out);
        }
        if (corrupt->parsed()) {
            if (corrupt_model.empty() == corrupt_sets.empty())
                throw config_error("corrupt needs exactly one of --model or --sets");
            return cmd_corrupt(corrupt_model, corrupt_sets, corrupt_corpus,
                               corrupt_output, out);
        }
        if (tune->parsed()) return cmd_tune(tune_model, tune_steepness, tune_output, out);
        err << "error: no subcommand\n";
        return kExitUsage;
    } catch (const config_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const parse_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const io_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    }
}

}  // namespace cli
}  // namespace ctxspell
