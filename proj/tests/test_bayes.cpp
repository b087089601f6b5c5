#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ctxspell/bayes.hpp"
#include "testutil.hpp"

using namespace ctxspell;

namespace {

const char* kDiaryCorpus =
    "he/PPS made/VBD an/AT entry/NN in/IN his/POSS-DET diary/NN\n"
    "she/PPS wrote/VBD in/IN her/POSS-DET diary/NN\n"
    "he/PPS scribbled/VBD in/IN his/POSS-DET diary/NN\n"
    "the/AT milk/NN came/VBD from/IN the/AT dairy/NN\n"
    "fresh/JJ milk/NN left/VBD the/AT dairy/NN\n"
    "the/AT dairy/NN sells/VBZ milk/NN daily/RB\n";

bool has_feature(const std::vector<Feature>& features, const std::string& key) {
    return std::any_of(features.begin(), features.end(),
                       [&](const Feature& f) { return f.key() == key; });
}

FeatureEntry make_collocation(std::vector<PatternElement> pattern, int left_len,
                              double strength) {
    FeatureEntry entry;
    entry.feature.kind = Feature::Kind::Collocation;
    entry.feature.pattern = std::move(pattern);
    entry.feature.left_len = left_len;
    entry.strength = strength;
    return entry;
}

FeatureEntry make_context_word(const std::string& word) {
    FeatureEntry entry;
    entry.feature.kind = Feature::Kind::ContextWord;
    entry.feature.word = word;
    return entry;
}

}  // namespace

TEST_CASE("match_features finds context words and tag-set collocations") {
    TaggedCorpus corpus = parse_tagged_corpus(kDiaryCorpus);
    BayesConfig config;

    Sentence diary{"he", "made", "an", "entry", "in", "his", "diary"};
    auto features = match_features(diary, 6, config, corpus.tag_dictionary);
    CHECK(has_feature(features, "CTXWORD entry"));
    CHECK(has_feature(features, "CTXWORD in"));
    CHECK_FALSE(has_feature(features, "CTXWORD diary"));  // target excluded
    // "in his" expressed as literal "in" plus the possessive-determiner tag
    CHECK(has_feature(features, "COLLOC 2 w=in t=POSS-DET"));
    CHECK(has_feature(features, "COLLOC 2 w=in w=his"));
    CHECK(has_feature(features, "COLLOC 1 t=POSS-DET"));

    Sentence dairy{"the", "milk", "came", "from", "the", "dairy"};
    auto dairy_features = match_features(dairy, 5, config, corpus.tag_dictionary);
    CHECK(has_feature(dairy_features, "CTXWORD milk"));
}

TEST_CASE("match_features truncates at sentence boundaries") {
    TaggedCorpus corpus = parse_tagged_corpus(kDiaryCorpus);
    BayesConfig config;
    Sentence sentence{"diary", "entries", "pile", "up"};
    for (const Feature& f : match_features(sentence, 0, config, corpus.tag_dictionary)) {
        if (f.kind == Feature::Kind::Collocation) CHECK(f.left_len == 0);
    }
    // context window clipped to the sentence
    Sentence shorty{"x", "diary"};
    auto features = match_features(shorty, 1, config, corpus.tag_dictionary);
    CHECK(has_feature(features, "CTXWORD x"));
}

TEST_CASE("context words outside the window half-width do not match") {
    TaggedCorpus corpus = parse_tagged_corpus(kDiaryCorpus);
    BayesConfig config;
    config.context_window = 2;
    Sentence sentence{"milk", "a", "b", "c", "diary"};
    auto features = match_features(sentence, 4, config, corpus.tag_dictionary);
    CHECK_FALSE(has_feature(features, "CTXWORD milk"));  // 4 tokens away, k=2
    CHECK(has_feature(features, "CTXWORD c"));
}

TEST_CASE("train_bayes computes MLE priors from occurrence counts") {
    TaggedCorpus corpus = parse_tagged_corpus(
        "x/T one/C\nx/T two/C\nx/T three/C\ny/T four/C");
    BayesModel model = train_bayes(corpus, make_confusion_set({"x", "y"}), BayesConfig{});
    CHECK(model.prior("x") == doctest::Approx(0.75));
    CHECK(model.prior("y") == doctest::Approx(0.25));
    CHECK(model.total_occurrences == 4);
}

TEST_CASE("train_bayes prunes sparse context words and flat collocations") {
    TaggedCorpus corpus = parse_tagged_corpus(
        "red/J x/T one/C\n"
        "red/J x/T two/C\n"
        "blue/J y/T three/C\n"
        "green/J y/T four/C");
    BayesModel model = train_bayes(corpus, make_confusion_set({"x", "y"}), BayesConfig{});

    CHECK(model.features.count("CTXWORD red") == 1);   // 2 occurrences, 2 non-occurrences
    CHECK(model.features.count("CTXWORD one") == 0);   // single occurrence
    CHECK(model.features.count("CTXWORD blue") == 0);  // single occurrence
    // right-neighbor tag C matches every occurrence of both members in prior
    // proportion: no discrimination, pruned
    CHECK(model.features.count("COLLOC 0 t=C") == 0);
    CHECK(model.features.count("COLLOC 1 t=J") == 0);
    // literal left neighbor "red" matches only x and has enough support
    CHECK(model.features.count("COLLOC 1 w=red") == 1);
    CHECK(model.features.at("COLLOC 1 w=red").member_matches.at("x") == 2);
}

TEST_CASE("train_bayes with zero occurrences yields a flagged prior-only model") {
    TaggedCorpus corpus = parse_tagged_corpus("nothing/N here/R");
    BayesModel model = train_bayes(corpus, make_confusion_set({"x", "y"}), BayesConfig{});
    CHECK(model.prior_only);
    CHECK(model.features.empty());
    CHECK(model.prior("x") == doctest::Approx(0.5));
}

TEST_CASE("training statistics equal an exhaustive recount of matches") {
    TaggedCorpus corpus = parse_tagged_corpus(testutil::kPeacePieceCorpus);
    ConfusionSet set = make_confusion_set({"peace", "piece"});
    BayesConfig config;
    BayesModel model = train_bayes(corpus, set, config);
    REQUIRE(!model.features.empty());

    const std::vector<Occurrence> occurrences = find_occurrences(corpus, set);
    for (const auto& [key, entry] : model.features) {
        std::map<std::string, std::int64_t> recount;
        std::int64_t total = 0;
        for (const Occurrence& occ : occurrences) {
            const TaggedSentence& sentence = corpus.sentences[occ.sentence_index];
            if (testutil::oracle_feature_matches(entry.feature, sentence, occ.position,
                                                 config, corpus.tag_dictionary)) {
                ++recount[fold(sentence[occ.position].surface)];
                ++total;
            }
        }
        CHECK(total == entry.total_matches);
        for (const std::string& member : set.words) {
            auto it = entry.member_matches.find(member);
            std::int64_t stored = it == entry.member_matches.end() ? 0 : it->second;
            CHECK(stored == recount[member]);
        }
    }
}

TEST_CASE("per-member match counts always sum to the total") {
    TaggedCorpus corpus = parse_tagged_corpus(testutil::kPeacePieceCorpus);
    BayesModel model =
        train_bayes(corpus, make_confusion_set({"peace", "piece"}), BayesConfig{});
    for (const auto& [key, entry] : model.features) {
        std::int64_t sum = 0;
        for (const auto& [member, count] : entry.member_matches) sum += count;
        CHECK(sum == entry.total_matches);
    }
}

TEST_CASE("raising min_feature_support never adds features") {
    TaggedCorpus corpus = parse_tagged_corpus(testutil::kPeacePieceCorpus);
    ConfusionSet set = make_confusion_set({"peace", "piece"});
    std::size_t previous = SIZE_MAX;
    for (std::int64_t support = 2; support <= 6; ++support) {
        BayesConfig config;
        config.min_feature_support = support;
        BayesModel model = train_bayes(corpus, set, config);
        CHECK(model.features.size() <= previous);
        previous = model.features.size();
    }
}

TEST_CASE("smoothed_cond_prob interpolates between member and marginal MLEs") {
    BayesModel model;
    model.set = make_confusion_set({"x", "y"});
    model.config.smoothing_constant = 10.0;
    model.occurrence_counts = {{"x", 4}, {"y", 4}};
    model.total_occurrences = 8;
    FeatureEntry entry;
    entry.member_matches = {{"x", 2}, {"y", 1}};
    entry.total_matches = 3;

    // (4/14)*0.5 + (10/14)*0.375 = 23/56
    CHECK(model.smoothed_cond_prob(entry, "x") ==
          doctest::Approx(23.0 / 56.0).epsilon(1e-12));

    // alpha -> 0: a member with no training data falls back to the marginal
    model.occurrence_counts["z"] = 0;
    CHECK(model.smoothed_cond_prob(entry, "z") == doctest::Approx(3.0 / 8.0));

    // alpha -> 1: plentiful data trusts the member MLE
    BayesModel big = model;
    big.occurrence_counts["x"] = 1000000;
    big.total_occurrences = 1000004;
    FeatureEntry big_entry;
    big_entry.member_matches = {{"x", 500000}};
    big_entry.total_matches = 500000;
    CHECK(big.smoothed_cond_prob(big_entry, "x") == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("smoothed_cond_prob stays between the two MLEs") {
    std::mt19937_64 rng(41);
    for (int round = 0; round < 200; ++round) {
        BayesModel model;
        model.set = make_confusion_set({"x", "y"});
        model.config.smoothing_constant = 0.5 + static_cast<double>(testutil::draw(rng, 40));
        std::int64_t nx = static_cast<std::int64_t>(testutil::draw(rng, 50));
        std::int64_t ny = 1 + static_cast<std::int64_t>(testutil::draw(rng, 50));
        model.occurrence_counts = {{"x", nx}, {"y", ny}};
        model.total_occurrences = nx + ny;
        FeatureEntry entry;
        std::int64_t mx = nx == 0 ? 0 : static_cast<std::int64_t>(testutil::draw(rng, nx + 1));
        std::int64_t my = static_cast<std::int64_t>(testutil::draw(rng, ny + 1));
        entry.member_matches = {{"x", mx}, {"y", my}};
        entry.total_matches = mx + my;

        const double mle_member = nx > 0 ? static_cast<double>(mx) / nx : 0.0;
        const double mle_marginal =
            static_cast<double>(mx + my) / static_cast<double>(nx + ny);
        const double smoothed = model.smoothed_cond_prob(entry, "x");
        CHECK(smoothed >= std::min(mle_member, mle_marginal) - 1e-12);
        CHECK(smoothed <= std::max(mle_member, mle_marginal) + 1e-12);
    }
}

TEST_CASE("resolve_dependencies keeps the stronger of nested collocations") {
    BayesModel model;
    model.set = make_confusion_set({"x", "y"});
    Sentence sentence{"entry", "in", "his", "diary"};
    const std::size_t position = 3;

    FeatureEntry wide = make_collocation({{false, "in"}, {true, "POSS-DET"}}, 2, 0.9);
    FeatureEntry narrow = make_collocation({{true, "POSS-DET"}}, 1, 0.6);

    auto kept = model.resolve_dependencies({&wide, &narrow}, sentence, position);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0] == &wide);

    narrow.strength = 0.95;
    kept = model.resolve_dependencies({&wide, &narrow}, sentence, position);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0] == &narrow);

    // strength tie goes to the longer pattern
    narrow.strength = 0.9;
    kept = model.resolve_dependencies({&wide, &narrow}, sentence, position);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0] == &wide);
}

TEST_CASE("resolve_dependencies drops context words covered by a collocation") {
    BayesModel model;
    model.set = make_confusion_set({"x", "y"});
    Sentence sentence{"entry", "in", "his", "diary"};

    FeatureEntry colloc = make_collocation({{false, "in"}, {true, "POSS-DET"}}, 2, 0.9);
    FeatureEntry ctx_in = make_context_word("in");
    FeatureEntry ctx_entry = make_context_word("entry");

    auto kept = model.resolve_dependencies({&colloc, &ctx_in, &ctx_entry}, sentence, 3);
    REQUIRE(kept.size() == 2);
    CHECK(std::count(kept.begin(), kept.end(), &colloc) == 1);
    CHECK(std::count(kept.begin(), kept.end(), &ctx_entry) == 1);
    CHECK(std::count(kept.begin(), kept.end(), &ctx_in) == 0);
}

TEST_CASE("resolve_dependencies keeps disjoint features, is idempotent and order-free") {
    BayesModel model;
    model.set = make_confusion_set({"x", "y"});
    Sentence sentence{"a", "b", "x", "c", "d"};

    FeatureEntry left = make_collocation({{false, "b"}}, 1, 0.5);
    FeatureEntry right = make_collocation({{false, "c"}}, 0, 0.4);
    FeatureEntry straddle = make_collocation({{false, "b"}, {false, "c"}}, 1, 0.7);
    FeatureEntry ctx = make_context_word("a");

    auto kept = model.resolve_dependencies({&left, &right, &straddle, &ctx}, sentence, 2);
    // straddle's span {1,3} contains both single-element spans
    REQUIRE(kept.size() == 2);
    CHECK(std::count(kept.begin(), kept.end(), &straddle) == 1);
    CHECK(std::count(kept.begin(), kept.end(), &ctx) == 1);

    auto again = model.resolve_dependencies(kept, sentence, 2);
    CHECK(again == kept);
    auto reordered = model.resolve_dependencies({&ctx, &straddle, &right, &left}, sentence, 2);
    CHECK(reordered == kept);

    auto disjoint = model.resolve_dependencies({&left, &right}, sentence, 2);
    CHECK(disjoint.size() == 2);
}

TEST_CASE("score_bayes composes priors with smoothed feature probabilities") {
    TaggedCorpus corpus = parse_tagged_corpus(
        "red/J x/T one/C\n"
        "red/J x/T two/C\n"
        "blue/J y/T three/C\n"
        "green/J y/T four/C");
    ConfusionSet set = make_confusion_set({"x", "y"});
    BayesModel model = train_bayes(corpus, set, BayesConfig{});

    Sentence sentence{"red", "x", "five"};
    const Posterior posterior = model.score(sentence, 1, corpus.tag_dictionary);
    double expected_x = std::log(model.prior("x"));
    double expected_y = std::log(model.prior("y"));
    for (const std::string& key : posterior.used_features) {
        expected_x += std::log(model.smoothed_cond_prob(key, "x"));
        expected_y += std::log(model.smoothed_cond_prob(key, "y"));
    }
    CHECK(posterior.log_scores.at("x") == doctest::Approx(expected_x).epsilon(1e-12));
    CHECK(posterior.log_scores.at("y") == doctest::Approx(expected_y).epsilon(1e-12));

    // scoring is pure
    const Posterior posterior2 = model.score(sentence, 1, corpus.tag_dictionary);
    CHECK(posterior2.log_scores == posterior.log_scores);
    CHECK(posterior2.used_features == posterior.used_features);

    auto probabilities = posterior.probabilities();
    double sum = 0.0;
    for (const auto& [member, p] : probabilities) sum += p;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("posterior comparison follows prior times feature evidence") {
    // priors 0.75 vs 0.25; per-feature evidence 0.2 vs 0.9:
    // 0.75*0.2 = 0.15 < 0.25*0.9 = 0.225, so the rarer member wins
    CHECK(0.75 * 0.2 < 0.25 * 0.9);

    BayesModel model;
    model.set = make_confusion_set({"x", "y"});
    model.config.smoothing_constant = 1.0;
    model.occurrence_counts = {{"x", 3}, {"y", 1}};
    model.total_occurrences = 4;
    FeatureEntry entry = make_collocation({{false, "k"}}, 0, 0.5);
    entry.member_matches = {{"x", 0}, {"y", 1}};
    entry.total_matches = 1;
    model.features.emplace(entry.feature.key(), entry);

    Sentence sentence{"x", "k"};
    const Posterior posterior = model.score(sentence, 0, TagDictionary{});
    REQUIRE(posterior.used_features == std::vector<std::string>{"COLLOC 0 w=k"});

    const double sx = model.smoothed_cond_prob("COLLOC 0 w=k", "x");
    const double sy = model.smoothed_cond_prob("COLLOC 0 w=k", "y");
    const bool y_wins = 0.25 * sy > 0.75 * sx;
    CHECK(y_wins == (posterior.log_scores.at("y") > posterior.log_scores.at("x")));

    const std::string predicted = model.predict(sentence, 0, TagDictionary{});
    CHECK(predicted == (y_wins ? "y" : "x"));
}

TEST_CASE("predict_bayes: prior argmax without features, original wins ties") {
    BayesModel model;
    model.set = make_confusion_set({"x", "y"});
    model.occurrence_counts = {{"x", 3}, {"y", 1}};
    model.total_occurrences = 4;
    CHECK(model.predict({"y", "f"}, 0, TagDictionary{}) == "x");

    BayesModel tied;
    tied.set = make_confusion_set({"x", "y"});
    tied.occurrence_counts = {{"x", 2}, {"y", 2}};
    tied.total_occurrences = 4;
    CHECK(tied.predict({"y", "f"}, 0, TagDictionary{}) == "y");
    CHECK(tied.predict({"x", "f"}, 0, TagDictionary{}) == "x");
    CHECK(tied.predict({"unrelated", "f"}, 0, TagDictionary{}) == "x");  // alphabetical
}

TEST_CASE("a possessive-determiner collocation implies diary") {
    TaggedCorpus corpus = parse_tagged_corpus(kDiaryCorpus);
    ConfusionSet set = make_confusion_set({"dairy", "diary"});
    BayesModel model = train_bayes(corpus, set, BayesConfig{});

    Sentence sentence{"he", "made", "an", "entry", "in", "his", "dairy"};
    CHECK(model.predict(sentence, 6, corpus.tag_dictionary) == "diary");

    Sentence milky{"the", "milk", "truck", "reached", "the", "diary"};
    CHECK(model.predict(milky, 5, corpus.tag_dictionary) == "dairy");
}

TEST_CASE("collocations-only ablation drops context-word features") {
    TaggedCorpus corpus = parse_tagged_corpus(testutil::kPeacePieceCorpus);
    BayesConfig config;
    config.use_context_words = false;
    BayesModel model = train_bayes(corpus, make_confusion_set({"peace", "piece"}), config);
    for (const auto& [key, entry] : model.features)
        CHECK(entry.feature.kind == Feature::Kind::Collocation);
}
