#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ctxspell/config.hpp"
#include "ctxspell/error.hpp"
#include "ctxspell/system.hpp"
#include "ctxspell/text.hpp"

namespace ctxspell {

// Plain-text, sectioned, versioned model format. Every map serializes in key
// order and every float in shortest round-trip form, so identical training
// inputs produce byte-identical files and load(save(m)) == m.
inline const std::string kModelFormatVersion = "ctxspell-model-v1";

namespace detail {

// Members may contain inner spaces (multi-token forms), so count lines put
// the number first and the member last. Feature lines lead with the readable
// CTXWORD/COLLOC key; after the bar come the total and the per-member match
// counts in sorted member order.
inline void save_bayes_lines(std::string& out, const std::string& prefix,
                             const BayesModel& model,
                             const std::vector<std::string>& sorted_members) {
    for (const auto& [member, count] : model.occurrence_counts)
        out += prefix + " occ " + std::to_string(count) + " " + member + "\n";
    out += prefix + " prior_only " + (model.prior_only ? "true" : "false") + "\n";
    for (const auto& [key, entry] : model.features) {
        out += prefix + " " + key + " | " + std::to_string(entry.total_matches);
        for (const std::string& member : sorted_members) {
            auto it = entry.member_matches.find(member);
            out += ' ';
            out += std::to_string(it == entry.member_matches.end() ? 0 : it->second);
        }
        out += "\n";
    }
}

inline Feature parse_feature_key(const std::string& key, std::size_t line_no) {
    std::vector<std::string> parts = split_whitespace(key);
    Feature f;
    if (parts.size() == 2 && parts[0] == "CTXWORD") {
        f.kind = Feature::Kind::ContextWord;
        f.word = parts[1];
        return f;
    }
    if (parts.size() >= 3 && parts[0] == "COLLOC") {
        f.kind = Feature::Kind::Collocation;
        std::int64_t left = 0;
        if (!parse_int64(parts[1], left))
            throw parse_error("bad collocation placement: " + parts[1], line_no);
        f.left_len = static_cast<int>(left);
        for (std::size_t i = 2; i < parts.size(); ++i) {
            if (parts[i].size() < 3 || parts[i][1] != '=' ||
                (parts[i][0] != 'w' && parts[i][0] != 't'))
                throw parse_error("bad pattern element: " + parts[i], line_no);
            f.pattern.push_back({parts[i][0] == 't', parts[i].substr(2)});
        }
        return f;
    }
    throw parse_error("bad feature key: " + key, line_no);
}

inline void recompute_strengths(BayesModel& model) {
    for (auto& [key, entry] : model.features) {
        double best = 0.0, norm = 0.0;
        for (const std::string& member : model.set.words) {
            double s = model.smoothed_cond_prob(entry, member) * model.prior(member);
            best = std::max(best, s);
            norm += s;
        }
        entry.strength = norm > 0.0 ? best / norm : 0.0;
    }
}

}  // namespace detail

inline std::string save_model(const SystemModel& system) {
    std::string out = kModelFormatVersion + "\n";

    out += "[config]\n";
    for (const auto& [key, value] : config_items(system.config))
        out += key + "=" + value + "\n";

    out += "[provenance]\n";
    out += "corpus_digest=" + system.corpus_digest + "\n";
    out += "corpus_sentences=" + std::to_string(system.corpus_sentences) + "\n";
    out += std::string("holdout=") + (system.holdout ? "true" : "false") + "\n";

    out += "[tagdict]\n";
    for (const auto& [word, tags] : system.tag_dictionary) {
        out += word;
        for (const std::string& tag : tags) out += " " + tag;
        out += "\n";
    }

    out += "[trigram]\n";
    for (const auto& [tag, count] : system.trigram.unigram_counts)
        out += "UNI " + tag + " " + std::to_string(count) + "\n";
    for (const auto& [key, count] : system.trigram.bigram_counts)
        out += "BI " + key.first + " " + key.second + " " + std::to_string(count) + "\n";
    for (const auto& [key, count] : system.trigram.trigram_counts)
        out += "TRI " + std::get<0>(key) + " " + std::get<1>(key) + " " +
               std::get<2>(key) + " " + std::to_string(count) + "\n";
    for (const auto& [key, count] : system.trigram.emission_counts)
        out += "EMIT " + key.first + " " + key.second + " " + std::to_string(count) + "\n";

    for (const std::string& id : system.set_order) {
        const PerSetModel& per_set = system.sets.at(id);
        const std::vector<std::string> sorted_members = per_set.set.sorted_words();
        out += "[set " + id + "]\n";
        out += "words " + join(per_set.set.words, ",") + "\n";
        for (const auto& [member, count] : per_set.full_counts)
            out += "count " + std::to_string(count) + " " + member + "\n";
        out += std::string("subset_fallback ") +
               (per_set.subset_fallback ? "true" : "false") + "\n";
        out += "samples";
        if (auto it = system.ratio_samples.find(id); it != system.ratio_samples.end())
            for (double sample : it->second) out += " " + format_double(sample);
        out += "\n";
        detail::save_bayes_lines(out, "bayes", per_set.bayes, sorted_members);
        detail::save_bayes_lines(out, "subset", per_set.subset_bayes, sorted_members);
    }
    out += "[thresholds]\n";
    for (const std::string& id : system.set_order)
        out += "THRESH " + id + " " + format_double(system.thresholds.threshold_for(id)) +
               "\n";
    out += "[end]\n";
    return out;
}

inline SystemModel load_model(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line) || line != kModelFormatVersion)
        throw parse_error("unsupported model file (expected " + kModelFormatVersion + ")", 1);
    ++line_no;

    SystemModel system;
    bool saw_end = false;
    enum class Section { None, Config, Provenance, TagDict, Trigram, Set, Thresholds };
    Section section = Section::None;
    PerSetModel* current_set = nullptr;
    std::vector<std::string> current_members;  // sorted, for feature count columns

    const auto to_count = [&](const std::string& token) {
        std::int64_t value = 0;
        if (!parse_int64(token, value))
            throw parse_error("bad count: " + token, line_no);
        return value;
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line == "[end]") {
            saw_end = true;
            break;
        }
        if (line == "[config]") { section = Section::Config; continue; }
        if (line == "[provenance]") { section = Section::Provenance; continue; }
        if (line == "[tagdict]") { section = Section::TagDict; continue; }
        if (line == "[trigram]") { section = Section::Trigram; continue; }
        if (line == "[thresholds]") { section = Section::Thresholds; continue; }
        if (line.rfind("[set ", 0) == 0 && line.back() == ']') {
            const std::string id = line.substr(5, line.size() - 6);
            if (system.sets.count(id))
                throw parse_error("duplicate set section: " + id, line_no);
            section = Section::Set;
            system.set_order.push_back(id);
            current_set = &system.sets[id];
            current_members.clear();
            continue;
        }

        switch (section) {
            case Section::Config: {
                std::size_t eq = line.find('=');
                if (eq == std::string::npos)
                    throw parse_error("expected key=value in config section", line_no);
                try {
                    set_config_option(system.config, line.substr(0, eq), line.substr(eq + 1));
                } catch (const config_error& e) {
                    throw parse_error(e.what(), line_no);
                }
                break;
            }
            case Section::Provenance: {
                std::size_t eq = line.find('=');
                if (eq == std::string::npos)
                    throw parse_error("expected key=value in provenance section", line_no);
                const std::string key = line.substr(0, eq);
                const std::string value = line.substr(eq + 1);
                if (key == "corpus_digest") system.corpus_digest = value;
                else if (key == "corpus_sentences") system.corpus_sentences = to_count(value);
                else if (key == "holdout") system.holdout = value == "true";
                else throw parse_error("unknown provenance key: " + key, line_no);
                break;
            }
            case Section::TagDict: {
                std::vector<std::string> parts = split_whitespace(line);
                if (parts.size() < 2) throw parse_error("bad tagdict line", line_no);
                auto& tags = system.tag_dictionary[parts[0]];
                for (std::size_t i = 1; i < parts.size(); ++i) tags.insert(parts[i]);
                break;
            }
            case Section::Trigram: {
                std::vector<std::string> parts = split_whitespace(line);
                TrigramModel& model = system.trigram;
                if (parts.size() == 3 && parts[0] == "UNI") {
                    model.unigram_counts[parts[1]] = to_count(parts[2]);
                } else if (parts.size() == 4 && parts[0] == "BI") {
                    std::int64_t c = to_count(parts[3]);
                    model.bigram_counts[{parts[1], parts[2]}] = c;
                    model.bigram_context_counts[parts[1]] += c;
                } else if (parts.size() == 5 && parts[0] == "TRI") {
                    std::int64_t c = to_count(parts[4]);
                    model.trigram_counts[{parts[1], parts[2], parts[3]}] = c;
                    model.trigram_context_counts[{parts[1], parts[2]}] += c;
                } else if (parts.size() == 4 && parts[0] == "EMIT") {
                    std::int64_t c = to_count(parts[3]);
                    model.emission_counts[{parts[1], parts[2]}] = c;
                    model.tag_dictionary[parts[1]].insert(parts[2]);
                } else {
                    throw parse_error("bad trigram line", line_no);
                }
                break;
            }
            case Section::Set: {
                std::vector<std::string> parts = split_whitespace(line);
                if (parts.empty() || !current_set)
                    throw parse_error("unexpected line", line_no);
                if (parts[0] == "words" && parts.size() >= 2) {
                    current_set->set = make_confusion_set(split_char(line.substr(6), ','));
                    current_members = current_set->set.sorted_words();
                    current_set->bayes.set = current_set->set;
                    current_set->bayes.config = system.config.bayes;
                    current_set->subset_bayes.set = current_set->set;
                    current_set->subset_bayes.config = system.config.bayes;
                } else if (parts[0] == "count" && parts.size() >= 3) {
                    current_set->full_counts[line.substr(7 + parts[1].size())] =
                        to_count(parts[1]);
                } else if (parts[0] == "subset_fallback" && parts.size() == 2) {
                    current_set->subset_fallback = parts[1] == "true";
                } else if (parts[0] == "samples") {
                    auto& samples = system.ratio_samples[system.set_order.back()];
                    for (std::size_t i = 1; i < parts.size(); ++i) {
                        double value = 0;
                        if (!parse_double(parts[i], value))
                            throw parse_error("bad sample: " + parts[i], line_no);
                        samples.push_back(value);
                    }
                } else if ((parts[0] == "bayes" || parts[0] == "subset") && parts.size() >= 2) {
                    BayesModel& model = parts[0] == "bayes" ? current_set->bayes
                                                            : current_set->subset_bayes;
                    if (parts[1] == "occ" && parts.size() >= 4) {
                        const std::size_t member_at =
                            parts[0].size() + parts[1].size() + parts[2].size() + 3;
                        const std::int64_t count = to_count(parts[2]);
                        model.occurrence_counts[line.substr(member_at)] = count;
                        model.total_occurrences += count;
                    } else if (parts[1] == "prior_only" && parts.size() == 3) {
                        model.prior_only = parts[2] == "true";
                    } else if (parts[1] == "CTXWORD" || parts[1] == "COLLOC") {
                        const std::size_t bar = line.find(" | ");
                        if (bar == std::string::npos)
                            throw parse_error("feature line missing counts", line_no);
                        const std::string key = line.substr(parts[0].size() + 1,
                                                            bar - parts[0].size() - 1);
                        const std::vector<std::string> counts =
                            split_whitespace(line.substr(bar + 3));
                        if (counts.size() != 1 + current_members.size())
                            throw parse_error("bad feature count columns", line_no);
                        FeatureEntry entry;
                        entry.feature = detail::parse_feature_key(key, line_no);
                        entry.total_matches = to_count(counts[0]);
                        for (std::size_t i = 0; i < current_members.size(); ++i)
                            entry.member_matches[current_members[i]] = to_count(counts[1 + i]);
                        if (entry.feature.key() != key)
                            throw parse_error("non-canonical feature key: " + key, line_no);
                        model.features.emplace(key, std::move(entry));
                    } else {
                        throw parse_error("bad set line: " + line, line_no);
                    }
                } else {
                    throw parse_error("bad set line: " + line, line_no);
                }
                break;
            }
            case Section::Thresholds: {
                std::vector<std::string> parts = split_whitespace(line);
                if (parts.size() < 3 || parts[0] != "THRESH")
                    throw parse_error("bad threshold line: " + line, line_no);
                double value = 0;
                if (!parse_double(parts.back(), value))
                    throw parse_error("bad threshold: " + parts.back(), line_no);
                const std::string id =
                    line.substr(7, line.size() - 7 - parts.back().size() - 1);
                system.thresholds.thresholds[id] = value;
                break;
            }
            case Section::None:
                throw parse_error("content before any section", line_no);
        }
    }
    if (!saw_end) throw parse_error("truncated model file (missing [end])", line_no);

    // Derived trigram state.
    TrigramModel& trigram = system.trigram;
    trigram.config = system.config.trigram;
    trigram.total_events = 0;
    for (const auto& [tag, count] : trigram.unigram_counts) {
        trigram.total_events += count;
        if (tag != kEndTag) trigram.tag_inventory.insert(tag);
    }
    std::map<std::string, std::int64_t> distinct_words;
    for (const auto& [key, count] : trigram.emission_counts) ++distinct_words[key.second];
    for (const auto& [tag, words] : distinct_words)
        if (words >= trigram.config.open_class_min_words) trigram.open_class.insert(tag);

    system.thresholds.steepness = system.config.steepness;
    for (auto& [id, per_set] : system.sets) {
        detail::recompute_strengths(per_set.bayes);
        detail::recompute_strengths(per_set.subset_bayes);
    }
    return system;
}

inline SystemModel load_model(std::string_view text) {
    std::istringstream in{std::string(text)};
    return load_model(in);
}

}  // namespace ctxspell
