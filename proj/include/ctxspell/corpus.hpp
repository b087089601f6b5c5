#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ctxspell/error.hpp"
#include "ctxspell/text.hpp"

namespace ctxspell {

struct TaggedToken {
    std::string surface;
    std::string tag;

    bool operator==(const TaggedToken&) const = default;
};

using Sentence = std::vector<std::string>;        // surfaces only
using TaggedSentence = std::vector<TaggedToken>;  // training data

struct TaggedCorpus {
    std::vector<TaggedSentence> sentences;
    std::set<std::string> tag_inventory;
    // Case-folded word -> set of tags observed with it. Lookups are always
    // through the folded surface.
    std::map<std::string, std::set<std::string>> tag_dictionary;

    bool empty() const { return sentences.empty(); }

    void index() {
        tag_inventory.clear();
        tag_dictionary.clear();
        for (const auto& sentence : sentences) {
            for (const auto& token : sentence) {
                tag_inventory.insert(token.tag);
                tag_dictionary[fold(token.surface)].insert(token.tag);
            }
        }
    }
};

// One sentence per line, whitespace-separated word/TAG tokens. The last '/'
// splits word from tag, so words may themselves contain slashes.
inline TaggedCorpus parse_tagged_corpus(std::istream& in) {
    TaggedCorpus corpus;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!utf8_valid(line))
            throw parse_error("invalid UTF-8", line_no);
        if (trim(line).empty()) continue;

        TaggedSentence sentence;
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r'))
                ++i;
            std::size_t start = i;
            while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r')
                ++i;
            if (i == start) break;
            std::string_view token(line.data() + start, i - start);
            std::size_t slash = token.rfind('/');
            if (slash == std::string_view::npos)
                throw parse_error("malformed token '" + std::string(token) +
                                      "': expected word/TAG",
                                  line_no, start + 1);
            if (slash + 1 == token.size())
                throw parse_error("empty tag in token '" + std::string(token) + "'",
                                  line_no, start + 1);
            if (slash == 0)
                throw parse_error("empty word in token '" + std::string(token) + "'",
                                  line_no, start + 1);
            sentence.push_back({std::string(token.substr(0, slash)),
                                std::string(token.substr(slash + 1))});
        }
        if (!sentence.empty()) corpus.sentences.push_back(std::move(sentence));
    }
    corpus.index();
    return corpus;
}

inline TaggedCorpus parse_tagged_corpus(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_tagged_corpus(in);
}

inline std::string serialize_tagged_corpus(const TaggedCorpus& corpus) {
    std::string out;
    for (const auto& sentence : corpus.sentences) {
        for (std::size_t i = 0; i < sentence.size(); ++i) {
            if (i > 0) out += ' ';
            out += sentence[i].surface;
            out += '/';
            out += sentence[i].tag;
        }
        out += '\n';
    }
    return out;
}

struct SplitSpec {
    double train_fraction = 0.8;
    std::uint64_t seed = 42;
};

namespace detail {

// Rejection-sampled bounded draw; std::uniform_int_distribution is not
// portable across standard libraries, mt19937_64 is.
inline std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() -
        std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

inline void shuffle_indices(std::vector<std::size_t>& indices, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = indices.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(bounded_draw(rng, i));
        std::swap(indices[i - 1], indices[j]);
    }
}

}  // namespace detail

// Sentence-granularity partition. Both halves keep the original corpus order
// so retraining contexts stay intact and the split is reproducible.
inline std::pair<TaggedCorpus, TaggedCorpus> split_corpus(const TaggedCorpus& corpus,
                                                          const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
        throw config_error("train_fraction must be in (0,1), got " +
                           format_double(spec.train_fraction));

    const std::size_t n = corpus.sentences.size();
    std::vector<std::size_t> indices(n);
    for (std::size_t i = 0; i < n; ++i) indices[i] = i;
    detail::shuffle_indices(indices, spec.seed);

    const auto n_train = static_cast<std::size_t>(
        std::llround(spec.train_fraction * static_cast<double>(n)));
    std::vector<bool> in_train(n, false);
    for (std::size_t i = 0; i < n_train && i < n; ++i) in_train[indices[i]] = true;

    TaggedCorpus train, test;
    for (std::size_t i = 0; i < n; ++i)
        (in_train[i] ? train : test).sentences.push_back(corpus.sentences[i]);
    train.index();
    test.index();
    return {std::move(train), std::move(test)};
}

// Whitespace tokenization, one sentence per line, empty lines skipped.
inline std::vector<Sentence> tokenize_plain(std::string_view text) {
    std::vector<Sentence> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == '\n') {
            Sentence tokens = split_whitespace(text.substr(start, i - start));
            if (!tokens.empty()) out.push_back(std::move(tokens));
            start = i + 1;
        }
    }
    return out;
}

struct ConfusionSet {
    std::vector<std::string> words;  // lowercase, file order
    std::string id;

    bool contains(std::string_view surface) const {
        std::string folded = fold(surface);
        return std::find(words.begin(), words.end(), folded) != words.end();
    }

    std::vector<std::string> sorted_words() const {
        std::vector<std::string> out = words;
        std::sort(out.begin(), out.end());
        return out;
    }
};

inline ConfusionSet make_confusion_set(std::vector<std::string> words) {
    ConfusionSet set;
    for (auto& w : words) {
        std::string folded = fold(trim(w));
        if (folded.empty()) continue;
        if (std::find(set.words.begin(), set.words.end(), folded) == set.words.end())
            set.words.push_back(std::move(folded));
    }
    set.id = join(set.words, ",");
    return set;
}

// One set per line, comma-separated words; '#' starts a comment line.
inline std::vector<ConfusionSet> parse_confusion_sets(std::istream& in) {
    std::vector<ConfusionSet> sets;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string body = trim(line);
        if (body.empty() || body[0] == '#') continue;
        ConfusionSet set = make_confusion_set(split_char(body, ','));
        if (set.words.size() < 2)
            throw parse_error("confusion set needs at least 2 distinct words", line_no);
        sets.push_back(std::move(set));
    }
    return sets;
}

inline std::vector<ConfusionSet> parse_confusion_sets(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_confusion_sets(in);
}

// Every token whose folded surface belongs to a set, once per containing set,
// in position order.
inline std::vector<std::pair<std::size_t, const ConfusionSet*>> find_targets(
    const Sentence& sentence, const std::vector<ConfusionSet>& sets) {
    std::vector<std::pair<std::size_t, const ConfusionSet*>> out;
    for (std::size_t pos = 0; pos < sentence.size(); ++pos) {
        std::string folded = fold(sentence[pos]);
        for (const auto& set : sets) {
            if (std::find(set.words.begin(), set.words.end(), folded) != set.words.end())
                out.emplace_back(pos, &set);
        }
    }
    return out;
}

struct Occurrence {
    std::size_t sentence_index;
    std::size_t position;
};

inline std::vector<Occurrence> find_occurrences(const TaggedCorpus& corpus,
                                                const ConfusionSet& set) {
    std::vector<Occurrence> out;
    for (std::size_t s = 0; s < corpus.sentences.size(); ++s) {
        const auto& sentence = corpus.sentences[s];
        for (std::size_t pos = 0; pos < sentence.size(); ++pos) {
            if (set.contains(sentence[pos].surface)) out.push_back({s, pos});
        }
    }
    return out;
}

inline Sentence strip_tags(const TaggedSentence& sentence) {
    Sentence out;
    out.reserve(sentence.size());
    for (const auto& token : sentence) out.push_back(token.surface);
    return out;
}

struct CorruptedInstance {
    Sentence sentence;      // tags discarded, planted word in place
    std::size_t position;
    std::string intended;   // lowercase member that was there originally
    std::string planted;    // lowercase member substituted in
};

// Each correct occurrence yields one variant per other set member.
inline std::vector<CorruptedInstance> generate_corrupted(const TaggedCorpus& test,
                                                         const ConfusionSet& set) {
    std::vector<CorruptedInstance> out;
    for (const Occurrence& occ : find_occurrences(test, set)) {
        const TaggedSentence& gold = test.sentences[occ.sentence_index];
        const std::string original = gold[occ.position].surface;
        const std::string intended = fold(original);
        for (const std::string& member : set.words) {
            if (member == intended) continue;
            CorruptedInstance inst;
            inst.sentence = strip_tags(gold);
            inst.sentence[occ.position] = match_capitalization(original, member);
            inst.position = occ.position;
            inst.intended = intended;
            inst.planted = member;
            out.push_back(std::move(inst));
        }
    }
    return out;
}

}  // namespace ctxspell
