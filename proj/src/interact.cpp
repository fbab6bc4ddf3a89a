#include "miir/interact.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "miir/analyzer.hpp"
#include "miir/common.hpp"

namespace miir {

using nlohmann::json;

std::string to_string(Answer a) {
    return a == Answer::yes ? "yes" : "no";
}

std::string to_string(GenTag g) {
    return g == GenTag::template_gen ? "template" : "remote";
}

std::string to_string(AnswerSource s) {
    switch (s) {
        case AnswerSource::heuristic: return "heuristic";
        case AnswerSource::lexical_sim: return "lexical_sim";
        case AnswerSource::remote: return "remote";
    }
    return "heuristic";
}

Answer answer_from_string(const std::string& s) {
    if (s == "yes") return Answer::yes;
    if (s == "no") return Answer::no;
    throw ParseError("answer must be yes or no, got \"" + s + "\"");
}

namespace {

GenTag gen_from_string(const std::string& s) {
    if (s == "template") return GenTag::template_gen;
    if (s == "remote") return GenTag::remote_gen;
    throw ParseError("unknown generator tag: " + s);
}

AnswerSource ans_src_from_string(const std::string& s) {
    if (s == "heuristic") return AnswerSource::heuristic;
    if (s == "lexical_sim") return AnswerSource::lexical_sim;
    if (s == "remote") return AnswerSource::remote;
    throw ParseError("unknown answer source: " + s);
}

void require_non_empty(const std::string& value, const char* what) {
    if (value.empty()) throw InputError(std::string(what) + " must be non-empty");
}

}  // namespace

json Interaction::to_json() const {
    json j = {
        {"qid", query_id},          {"turn", turn},
        {"facet", facet.to_json()}, {"question", question},
        {"answer", to_string(answer)},
        {"gen", to_string(gen)},    {"ans_src", to_string(ans_src)},
    };
    if (intent_passage_id) j["intent_pid"] = *intent_passage_id;
    return j;
}

Interaction Interaction::from_json(const json& j) {
    Interaction x;
    try {
        x.query_id = j.at("qid").get<std::string>();
        x.turn = j.at("turn").get<int>();
        x.facet = Facet::from_json(j.at("facet"));
        x.question = j.at("question").get<std::string>();
        x.answer = answer_from_string(j.at("answer").get<std::string>());
        if (j.contains("intent_pid")) x.intent_passage_id = j.at("intent_pid").get<std::string>();
        x.gen = gen_from_string(j.at("gen").get<std::string>());
        x.ans_src = ans_src_from_string(j.at("ans_src").get<std::string>());
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed interaction record: ") + e.what());
    }
    return x;
}

std::string serialize_cq_prompt(const std::string& query_text, const std::string& facet_string) {
    require_non_empty(query_text, "query text");
    require_non_empty(facet_string, "facet string");
    return "Query: " + query_text + " Facet: " + facet_string;
}

std::string serialize_us_prompt(const std::string& query_text, const std::string& intent_text,
                                const std::string& question) {
    require_non_empty(query_text, "query text");
    require_non_empty(intent_text, "intent text");
    require_non_empty(question, "question");
    return "Query: " + query_text + " Intent: " + intent_text + " Question: " + question;
}

std::string serialize_rank_prompt(const std::string& query_text, const std::string& passage_text,
                                  const std::string& question, Answer answer) {
    require_non_empty(query_text, "query text");
    require_non_empty(passage_text, "passage text");
    require_non_empty(question, "question");
    return "Query: " + query_text + " Document: " + passage_text + " Question: " + question +
           " Answer: " + to_string(answer);
}

std::string template_question(const Facet& facet) {
    if (facet.words.empty()) throw InputError("template question needs a facet with at least one word");
    return "are you looking for " + facet.joined() + "?";
}

std::string remote_question(const GatewayClient& gateway, const std::string& query_text,
                            const std::string& facet_string) {
    auto text = gateway.generate(serialize_cq_prompt(query_text, facet_string));
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw ProtocolError("gateway generated an empty question");
    }
    return text;
}

Answer heuristic_answer(const Facet& facet) {
    if (!facet.polarity) throw DomainError("heuristic answer needs a facet with polarity set");
    return *facet.polarity == Polarity::positive ? Answer::yes : Answer::no;
}

namespace {

// Template scaffolding words carry no facet signal and are excluded from
// lexical coverage.
const std::unordered_set<std::string_view>& boilerplate_tokens() {
    static const std::unordered_set<std::string_view> kSet = {
        "are",   "you", "looking", "for", "do", "want",       "to",        "know",
        "the",   "a",   "of",      "is",  "in", "about",      "interested", "referring",
    };
    return kSet;
}

std::set<std::string> token_set(const std::string& text) {
    static const Analyzer analyzer(AnalyzerOptions{2, false});
    auto tokens = analyzer.tokenize(text);
    return {tokens.begin(), tokens.end()};
}

}  // namespace

Answer lexical_sim_answer(const std::string& query_text, const std::string& intent_text,
                          const std::string& question, double theta) {
    require_non_empty(intent_text, "intent text");
    if (theta < 0.0 || theta > 1.0) throw InputError("theta must lie in [0,1]");

    const auto query_tokens = token_set(query_text);
    const auto intent_tokens = token_set(intent_text);

    std::set<std::string> content;
    for (const auto& token: token_set(question)) {
        if (query_tokens.contains(token) || boilerplate_tokens().contains(token)) continue;
        content.insert(token);
    }
    if (content.empty()) return Answer::no;

    std::size_t covered = 0;
    for (const auto& token: content) {
        if (intent_tokens.contains(token)) ++covered;
    }
    const double coverage = static_cast<double>(covered) / static_cast<double>(content.size());
    return coverage >= theta ? Answer::yes : Answer::no;
}

Answer remote_answer(const GatewayClient& gateway, const std::string& query_text,
                     const std::string& intent_text, const std::string& question) {
    auto raw = gateway.answer_text(serialize_us_prompt(query_text, intent_text, question));
    // Normalize: trim whitespace, case-fold. Anything but yes/no is an error.
    const auto begin = raw.find_first_not_of(" \t\r\n");
    const auto end = raw.find_last_not_of(" \t\r\n");
    std::string norm = begin == std::string::npos ? "" : raw.substr(begin, end - begin + 1);
    std::transform(norm.begin(), norm.end(), norm.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (norm == "yes") return Answer::yes;
    if (norm == "no") return Answer::no;
    throw ProtocolError("gateway answer must be yes or no, got \"" + raw + "\"");
}

GeneratedQuestion TemplateQuestionGenerator::question(const std::string&, const Facet& facet) const {
    return {template_question(facet), GenTag::template_gen};
}

RemoteQuestionGenerator::RemoteQuestionGenerator(std::shared_ptr<GatewayClient> gateway, bool fallback_to_template)
    : gateway_(std::move(gateway)), fallback_(fallback_to_template) {
    if (!gateway_) throw ConfigError("remote question generator needs a gateway client");
}

GeneratedQuestion RemoteQuestionGenerator::question(const std::string& query_text, const Facet& facet) const {
    try {
        return {remote_question(*gateway_, query_text, facet.joined()), GenTag::remote_gen};
    } catch (const GatewayError&) {
        if (!fallback_) throw;
    } catch (const ProtocolError&) {
        if (!fallback_) throw;
    }
    return {template_question(facet), GenTag::template_gen};
}

LexicalSimUserSimulator::LexicalSimUserSimulator(double theta): theta_(theta) {
    if (theta < 0.0 || theta > 1.0) throw ConfigError("theta must lie in [0,1]");
}

Answer LexicalSimUserSimulator::answer(const std::string& query_text, const std::string& intent_text,
                                       const std::string& question) const {
    return lexical_sim_answer(query_text, intent_text, question, theta_);
}

RemoteUserSimulator::RemoteUserSimulator(std::shared_ptr<GatewayClient> gateway): gateway_(std::move(gateway)) {
    if (!gateway_) throw ConfigError("remote user simulator needs a gateway client");
}

Answer RemoteUserSimulator::answer(const std::string& query_text, const std::string& intent_text,
                                   const std::string& question) const {
    return remote_answer(*gateway_, query_text, intent_text, question);
}

}  // namespace miir
