#include <doctest.h>

#include <fstream>

#include "miir/augment.hpp"
#include "miir/common.hpp"
#include "support/planted.hpp"
#include "support/temp_dir.hpp"

using namespace miir;
using miir::testing::TempDir;

namespace {

HashedEmbeddingProvider plain_provider() {
    return HashedEmbeddingProvider(LocalProviderConfig{}, IdfTable{});
}

Collection one_query_collection() {
    Collection c;
    c.passages = {
        {"p1", {"p1", "relevant passage about submarine warfare effects"}},
        {"n1", {"n1", "negative about limited partnership business"}},
        {"n2", {"n2", "negative about court conservatorship process"}},
        {"n3", {"n3", "negative about gravely disabled persons"}},
    };
    c.queries = {{"q1", {"q1", "why did the us enter ww1"}}};
    c.qrels.by_query["q1"] = Judgment{{"p1"}, {"n1", "n2", "n3"}};
    return c;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_SUITE("augment") {

TEST_CASE("offline loop: one interaction per facet, answers match polarity") {
    auto c = one_query_collection();
    auto provider = plain_provider();
    TemplateQuestionGenerator generator;
    auto dataset = augment_offline(c, provider, generator, 5, {}, 42);

    REQUIRE(dataset.interactions.size() == 4);
    std::size_t yes = 0;
    for (const auto& x: dataset.interactions) {
        if (x.answer == Answer::yes) ++yes;
        REQUIRE(x.facet.polarity.has_value());
        CHECK((x.answer == Answer::yes) == (x.facet.polarity == Polarity::positive));
        CHECK(x.ans_src == AnswerSource::heuristic);
        CHECK(x.turn == 1);
        CHECK_FALSE(x.intent_passage_id.has_value());
    }
    CHECK(yes == 1);

    // deterministic (query, polarity positives-first, passage id) order
    CHECK(dataset.interactions[0].facet.source_passage_id == "p1");
    CHECK(dataset.interactions[1].facet.source_passage_id == "n1");
    CHECK(dataset.interactions[2].facet.source_passage_id == "n2");
    CHECK(dataset.interactions[3].facet.source_passage_id == "n3");
}

TEST_CASE("caps limit negatives per query with seeded sampling") {
    auto c = one_query_collection();
    auto provider = plain_provider();
    TemplateQuestionGenerator generator;
    AugmentCaps caps;
    caps.max_neg = 2;
    auto dataset = augment_offline(c, provider, generator, 5, caps, 42);
    std::size_t negatives = 0;
    for (const auto& x: dataset.interactions) {
        if (x.answer == Answer::no) ++negatives;
    }
    CHECK(negatives == 2);
    CHECK(dataset.interactions.size() == 3);

    // identical seed picks the identical subset; a different seed may differ
    auto again = augment_offline(c, provider, generator, 5, caps, 42);
    REQUIRE(again.interactions.size() == dataset.interactions.size());
    for (std::size_t i = 0; i < again.interactions.size(); ++i) {
        CHECK(again.interactions[i].facet.source_passage_id ==
              dataset.interactions[i].facet.source_passage_id);
    }
}

TEST_CASE("offline output is byte-identical across runs and thread counts") {
    auto planted = miir::testing::make_planted_corpus(8, 6, 3);
    auto provider = HashedEmbeddingProvider(
        LocalProviderConfig{}, IdfTable::from_passages(planted.collection.passages,
                                                       Analyzer(AnalyzerOptions{2, false})));
    TemplateQuestionGenerator generator;
    TempDir dir;

    auto once = augment_offline(planted.collection, provider, generator, 5, {}, 99, nullptr, 1);
    auto twice = augment_offline(planted.collection, provider, generator, 5, {}, 99, nullptr, 4);
    write_interactions_jsonl(dir.file("a.jsonl"), once.interactions);
    write_interactions_jsonl(dir.file("b.jsonl"), twice.interactions);
    CHECK(read_file(dir.file("a.jsonl")) == read_file(dir.file("b.jsonl")));
    CHECK_FALSE(once.interactions.empty());
}

TEST_CASE("offline requires qrels") {
    Collection c;
    c.passages = {{"p", {"p", "text"}}};
    auto provider = plain_provider();
    TemplateQuestionGenerator generator;
    CHECK_THROWS_AS(augment_offline(c, provider, generator, 5, {}, 1), InputError);
}

TEST_CASE("interactions jsonl round trips") {
    auto c = one_query_collection();
    auto provider = plain_provider();
    TemplateQuestionGenerator generator;
    auto dataset = augment_offline(c, provider, generator, 5, {}, 42);
    TempDir dir;
    write_interactions_jsonl(dir.file("x.jsonl"), dataset.interactions);
    auto loaded = load_interactions_jsonl(dir.file("x.jsonl"));
    REQUIRE(loaded.size() == dataset.interactions.size());
    for (std::size_t i = 0; i < loaded.size(); ++i) {
        CHECK(loaded[i].question == dataset.interactions[i].question);
        CHECK(loaded[i].facet.words == dataset.interactions[i].facet.words);
        CHECK(loaded[i].answer == dataset.interactions[i].answer);
    }
}

TEST_CASE("online: facet comes from the top of the stored first-stage ranking") {
    auto planted = miir::testing::make_planted_corpus(4, 6, 11);
    const auto& c = planted.collection;
    auto provider = HashedEmbeddingProvider(
        LocalProviderConfig{}, IdfTable::from_passages(c.passages, Analyzer(AnalyzerOptions{2, false})));
    TemplateQuestionGenerator generator;
    LexicalSimUserSimulator simulator(0.6);

    const auto& query = c.queries.at("q0");
    auto result = augment_online(c, InvertedIndex::build(c.passages, Analyzer()), provider, generator,
                                 simulator, query, 100, 5, 42);
    CHECK(result.interaction.facet.source_passage_id == result.first_stage.items.front().pid);
    CHECK(result.interaction.turn == 1);
    CHECK(result.interaction.ans_src == AnswerSource::lexical_sim);
    CHECK(result.interaction.intent_passage_id == planted.relevant_pids[0]);
    CHECK(result.first_stage.tag == "bm25");
    CHECK(result.first_stage.query_id == "q0");
}

TEST_CASE("online: top passage relevant means the answer is yes") {
    // Single family where the relevant passage wins BM25 outright.
    Collection c;
    c.passages = {
        {"r", {"r", "target subject keywords unique material facts"}},
        {"d", {"d", "unrelated filler text about other things entirely"}},
    };
    c.queries = {{"q", {"q", "target subject keywords"}}};
    c.qrels.by_query["q"] = Judgment{{"r"}, {"d"}};
    auto provider = HashedEmbeddingProvider(
        LocalProviderConfig{}, IdfTable::from_passages(c.passages, Analyzer(AnalyzerOptions{2, false})));
    TemplateQuestionGenerator generator;
    LexicalSimUserSimulator simulator(0.6);

    auto result = augment_online(c, InvertedIndex::build(c.passages, Analyzer()), provider, generator,
                                 simulator, c.queries.at("q"), 100, 5, 1);
    CHECK(result.interaction.facet.source_passage_id == "r");
    CHECK(result.interaction.answer == Answer::yes);
    CHECK(result.interaction.facet.polarity == Polarity::positive);
}

TEST_CASE("online: negative-facet question earns a no") {
    auto planted = miir::testing::make_planted_corpus(1, 6, 2);
    const auto& c = planted.collection;
    auto provider = HashedEmbeddingProvider(
        LocalProviderConfig{}, IdfTable::from_passages(c.passages, Analyzer(AnalyzerOptions{2, false})));
    TemplateQuestionGenerator generator;
    LexicalSimUserSimulator simulator(0.6);

    auto result = augment_online(c, InvertedIndex::build(c.passages, Analyzer()), provider, generator,
                                 simulator, c.queries.at("q0"), 100, 5, 42);
    // Planted corpora put a strong distractor on top.
    CHECK(result.interaction.facet.polarity == Polarity::negative);
    CHECK(result.interaction.answer == Answer::no);
}

TEST_CASE("online: queries without positives cannot drive the simulator") {
    Collection c;
    c.passages = {{"p", {"p", "only passage text here"}}};
    c.queries = {{"q", {"q", "passage text"}}};
    auto provider = plain_provider();
    TemplateQuestionGenerator generator;
    LexicalSimUserSimulator simulator(0.6);
    CHECK_THROWS_AS(augment_online(c, InvertedIndex::build(c.passages, Analyzer()), provider, generator,
                                   simulator, c.queries.at("q"), 100, 5, 1),
                    DomainError);
}

TEST_CASE("online: empty retrieval is an error for that query") {
    Collection c;
    c.passages = {{"p", {"p", "completely unrelated body"}}};
    c.queries = {{"q", {"q", "zebra quagga"}}};
    c.qrels.by_query["q"] = Judgment{{"p"}, {}};
    auto provider = plain_provider();
    TemplateQuestionGenerator generator;
    LexicalSimUserSimulator simulator(0.6);
    CHECK_THROWS_AS(augment_online(c, InvertedIndex::build(c.passages, Analyzer()), provider, generator,
                                   simulator, c.queries.at("q"), 100, 5, 1),
                    DomainError);
}

TEST_CASE("intent sampling is deterministic per seed and spans positives") {
    Judgment j;
    j.positives = {"a", "b", "c"};
    const auto first = sample_intent_pid(j, 5, "q1");
    CHECK(first == sample_intent_pid(j, 5, "q1"));
    REQUIRE(first.has_value());
    CHECK(j.positives.contains(*first));
    // different seeds eventually pick different positives
    bool differs = false;
    for (std::uint64_t seed = 0; seed < 32 && !differs; ++seed) {
        differs = sample_intent_pid(j, seed, "q1") != first;
    }
    CHECK(differs);
    CHECK_FALSE(sample_intent_pid(Judgment{}, 5, "q1").has_value());
}

struct FixedScorer: PairScorer {
    double score(const std::string&, const std::string& passage_text) const override {
        // score encodes how much of the query's subject the passage repeats
        if (passage_text.find("identical") != std::string::npos) return 0.99;
        if (passage_text.find("related") != std::string::npos) return 0.6;
        return 0.1;
    }
    std::string name() const override { return "fixed"; }
};

TEST_CASE("denoise: infinite threshold changes nothing") {
    auto c = one_query_collection();
    FixedScorer scorer;
    auto result = denoise_negatives(c, scorer, std::numeric_limits<double>::infinity());
    CHECK(result.removed == 0);
    CHECK(result.collection.qrels.at("q1").negatives == c.qrels.at("q1").negatives);
    CHECK(result.threshold_out_of_range);
}

TEST_CASE("denoise: near-duplicate negative is removed, positives untouched") {
    Collection c;
    c.passages = {
        {"pos", {"pos", "identical answer body"}},
        {"neg1", {"neg1", "identical answer body"}},  // same text as the positive
        {"neg2", {"neg2", "totally unrelated content"}},
    };
    c.queries = {{"q", {"q", "answer body"}}};
    c.qrels.by_query["q"] = Judgment{{"pos"}, {"neg1", "neg2"}};

    FixedScorer scorer;
    auto result = denoise_negatives(c, scorer, 0.9);
    CHECK(result.removed == 1);
    CHECK(result.collection.qrels.at("q").negatives == std::set<std::string>{"neg2"});
    CHECK(result.collection.qrels.at("q").positives == std::set<std::string>{"pos"});
    CHECK(result.collection.passages.size() == c.passages.size());
    CHECK_FALSE(result.threshold_out_of_range);
}

TEST_CASE("denoise threshold calibration maximizes retained precision") {
    struct TableScorer: PairScorer {
        double score(const std::string&, const std::string& p) const override {
            if (p == "borderline relevant") return 0.9;
            if (p == "nearly relevant") return 0.8;
            if (p == "off topic a") return 0.5;
            if (p == "off topic b") return 0.3;
            return 0.1;
        }
        std::string name() const override { return "table"; }
    };
    std::vector<LabeledPair> labeled = {
        {"q", "borderline relevant", false},
        {"q", "nearly relevant", false},
        {"q", "off topic a", true},
        {"q", "off topic b", true},
        {"q", "off topic c", true},
    };
    TableScorer scorer;
    // Precision-1 plateaus tie; the sweep keeps the most negatives: cut at 0.8.
    CHECK(calibrate_denoise_threshold(labeled, scorer) == doctest::Approx(0.8));
}

TEST_CASE("stats: means and fractions") {
    AugmentedDataset dataset;
    Collection c;
    c.queries = {{"q1", {"q1", "one"}}, {"q2", {"q2", "two"}}};
    c.passages = {{"p", {"p", "text"}}};
    auto add = [&](const std::string& qid, int n, Answer a) {
        for (int i = 0; i < n; ++i) {
            Interaction x;
            x.query_id = qid;
            x.question = "three word question";
            x.answer = a;
            dataset.interactions.push_back(x);
        }
    };
    add("q1", 3, Answer::no);
    add("q2", 5, Answer::no);
    auto stats = compute_stats(dataset, c);
    CHECK(stats.interactions_per_query_mean == doctest::Approx(4.0));
    CHECK(stats.negative_answer_fraction == doctest::Approx(1.0));
    CHECK(stats.positive_answer_fraction == doctest::Approx(0.0));
    CHECK(stats.mean_question_length == doctest::Approx(3.0));
    CHECK(stats.positive_answer_fraction + stats.negative_answer_fraction == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(stats.query_count == 2);
    CHECK(stats.passage_count == 1);
}

TEST_CASE("theta calibration lands on the best grid point") {
    // Build a slice whose agreement curve peaks at theta = 0.6.
    Collection c;
    c.passages = {
        {"i1", {"i1", "grape mango peach lemon orchard notes"}},          // full coverage intent
        {"i2", {"i2", "granite basalt slate marble quarry notes"}},       // full for its facet
        {"i3", {"i3", "grape mango cart notes"}},                         // covers 2 of 4
        {"i4", {"i4", "grape mango peach cart notes"}},                   // covers 3 of 4
        {"x1", {"x1", "unrelated words entirely different domain"}},
    };
    c.queries = {{"q1", {"q1", "orchard question"}}};

    auto make = [&](Polarity pol, std::vector<std::string> words, const std::string& intent_pid) {
        Interaction x;
        x.query_id = "q1";
        x.facet.query_id = "q1";
        x.facet.source_passage_id = intent_pid;
        x.facet.polarity = pol;
        x.facet.words = std::move(words);
        x.question = template_question(x.facet);
        x.answer = heuristic_answer(x.facet);
        x.intent_passage_id = intent_pid;
        return x;
    };

    AugmentedDataset dataset;
    // 4 positives with full coverage: agree at every theta.
    for (int i = 0; i < 4; ++i) {
        dataset.interactions.push_back(make(Polarity::positive, {"grape", "mango", "peach", "lemon"}, "i1"));
    }
    // 4 negatives with zero coverage: agree at every theta.
    for (int i = 0; i < 4; ++i) {
        dataset.interactions.push_back(make(Polarity::negative, {"granite", "basalt", "slate", "marble"}, "x1"));
    }
    // 3 negatives with coverage 0.5: only theta > 0.5 agrees.
    for (int i = 0; i < 3; ++i) {
        dataset.interactions.push_back(make(Polarity::negative, {"grape", "mango", "peach", "lemon"}, "i3"));
    }
    // 1 positive with coverage 0.75: theta <= 0.75 agrees.
    dataset.interactions.push_back(make(Polarity::positive, {"grape", "mango", "peach", "lemon"}, "i4"));

    CHECK(calibrate_theta(dataset, c) == doctest::Approx(0.6));
}

TEST_CASE("empty dataset has no statistics") {
    CHECK_THROWS_AS(compute_stats(AugmentedDataset{}, Collection{}), InputError);
}

}  // TEST_SUITE
