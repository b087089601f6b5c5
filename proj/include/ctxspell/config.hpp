#pragma once

#include <cstdint>
#include <istream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ctxspell/bayes.hpp"
#include "ctxspell/error.hpp"
#include "ctxspell/text.hpp"
#include "ctxspell/trigram.hpp"

namespace ctxspell {

// Every knob in one place. Defaults are the standard settings: a +/-10 word
// context window, collocations up to 2 elements, 80/20 split, steepness 0.5.
struct RunConfig {
    TrigramConfig trigram;
    BayesConfig bayes;
    double train_fraction = 0.8;
    std::uint64_t seed = 42;
    double steepness = 0.5;
    std::int64_t ratio_sample_cap = 10000;

    void validate() const {
        trigram.validate();
        bayes.validate();
        if (!(train_fraction > 0.0 && train_fraction < 1.0))
            throw config_error("train_fraction must be in (0,1)");
        if (steepness < 0.0 || steepness > 1.0)
            throw config_error("steepness must be in [0,1]");
        if (ratio_sample_cap < 1)
            throw config_error("ratio_sample_cap must be >= 1");
    }
};

namespace detail {

inline bool parse_bool(const std::string& value, bool& out) {
    if (value == "true" || value == "1") {
        out = true;
        return true;
    }
    if (value == "false" || value == "0") {
        out = false;
        return true;
    }
    return false;
}

inline std::uint64_t parse_u64_or_throw(const std::string& key, const std::string& value) {
    std::uint64_t out = 0;
    for (char c : value) {
        if (c < '0' || c > '9') throw config_error("invalid value for " + key + ": " + value);
        out = out * 10 + static_cast<std::uint64_t>(c - '0');
    }
    if (value.empty()) throw config_error("invalid value for " + key + ": empty");
    return out;
}

}  // namespace detail

inline void set_config_option(RunConfig& config, const std::string& key,
                              const std::string& value) {
    const auto want_double = [&](double& slot) {
        if (!parse_double(value, slot))
            throw config_error("invalid value for " + key + ": " + value);
    };
    const auto want_int = [&](std::int64_t& slot) {
        if (!parse_int64(value, slot))
            throw config_error("invalid value for " + key + ": " + value);
    };

    if (key == "trigram_weight") want_double(config.trigram.trigram_weight);
    else if (key == "bigram_weight") want_double(config.trigram.bigram_weight);
    else if (key == "unigram_weight") want_double(config.trigram.unigram_weight);
    else if (key == "unknown_emission_mass") want_double(config.trigram.unknown_emission_mass);
    else if (key == "open_class_min_words") want_int(config.trigram.open_class_min_words);
    else if (key == "self_tagged_words") {
        config.trigram.self_tagged.clear();
        for (const std::string& word : split_char(value, ',')) {
            std::string folded = fold(trim(word));
            if (!folded.empty()) config.trigram.self_tagged.insert(folded);
        }
    } else if (key == "context_window") {
        std::int64_t v = 0;
        want_int(v);
        config.bayes.context_window = static_cast<int>(v);
    } else if (key == "max_collocation_length") {
        std::int64_t v = 0;
        want_int(v);
        config.bayes.max_collocation_len = static_cast<int>(v);
    } else if (key == "min_feature_support") want_int(config.bayes.min_feature_support);
    else if (key == "smoothing_constant") want_double(config.bayes.smoothing_constant);
    else if (key == "min_discrimination") want_double(config.bayes.min_discrimination);
    else if (key == "context_words_enabled") {
        if (!detail::parse_bool(value, config.bayes.use_context_words))
            throw config_error("invalid value for " + key + ": " + value);
    } else if (key == "train_fraction") want_double(config.train_fraction);
    else if (key == "seed") config.seed = detail::parse_u64_or_throw(key, value);
    else if (key == "steepness") want_double(config.steepness);
    else if (key == "ratio_sample_cap") want_int(config.ratio_sample_cap);
    else throw config_error("unknown config key: " + key);
}

// key=value lines; '#' comments and blank lines ignored.
inline void parse_config_stream(std::istream& in, RunConfig& config) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string body = trim(line);
        if (body.empty() || body[0] == '#') continue;
        std::size_t eq = body.find('=');
        if (eq == std::string::npos)
            throw config_error("expected key=value at line " + std::to_string(line_no));
        try {
            set_config_option(config, trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
        } catch (const config_error& e) {
            throw config_error(std::string(e.what()) + " (line " + std::to_string(line_no) + ")");
        }
    }
}

// Deterministic key order, used verbatim in the model file's config section.
inline std::vector<std::pair<std::string, std::string>> config_items(const RunConfig& config) {
    std::vector<std::pair<std::string, std::string>> items;
    items.emplace_back("bigram_weight", format_double(config.trigram.bigram_weight));
    items.emplace_back("context_window", std::to_string(config.bayes.context_window));
    items.emplace_back("context_words_enabled",
                       config.bayes.use_context_words ? "true" : "false");
    items.emplace_back("max_collocation_length",
                       std::to_string(config.bayes.max_collocation_len));
    items.emplace_back("min_discrimination", format_double(config.bayes.min_discrimination));
    items.emplace_back("min_feature_support",
                       std::to_string(config.bayes.min_feature_support));
    items.emplace_back("open_class_min_words",
                       std::to_string(config.trigram.open_class_min_words));
    items.emplace_back("ratio_sample_cap", std::to_string(config.ratio_sample_cap));
    items.emplace_back("seed", std::to_string(config.seed));
    items.emplace_back("self_tagged_words", join(config.trigram.self_tagged, ","));
    items.emplace_back("smoothing_constant", format_double(config.bayes.smoothing_constant));
    items.emplace_back("steepness", format_double(config.steepness));
    items.emplace_back("train_fraction", format_double(config.train_fraction));
    items.emplace_back("trigram_weight", format_double(config.trigram.trigram_weight));
    items.emplace_back("unigram_weight", format_double(config.trigram.unigram_weight));
    items.emplace_back("unknown_emission_mass",
                       format_double(config.trigram.unknown_emission_mass));
    return items;
}

}  // namespace ctxspell
