#pragma once

#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "miir/facet.hpp"
#include "miir/gateway.hpp"

namespace miir {

enum class Answer { yes, no };
enum class GenTag { template_gen, remote_gen };
enum class AnswerSource { heuristic, lexical_sim, remote };

std::string to_string(Answer a);
std::string to_string(GenTag g);
std::string to_string(AnswerSource s);
Answer answer_from_string(const std::string& s);

/// One mixed-initiative turn: clarifying question plus yes/no answer.
struct Interaction {
    std::string query_id;
    int turn = 1;
    Facet facet;
    std::string question;
    Answer answer = Answer::no;
    std::optional<std::string> intent_passage_id;
    GenTag gen = GenTag::template_gen;
    AnswerSource ans_src = AnswerSource::heuristic;

    nlohmann::json to_json() const;
    static Interaction from_json(const nlohmann::json& j);
};

// Prompt serializations. Byte-exact layouts; the markers are literal.
std::string serialize_cq_prompt(const std::string& query_text, const std::string& facet_string);
std::string serialize_us_prompt(const std::string& query_text, const std::string& intent_text,
                                const std::string& question);
std::string serialize_rank_prompt(const std::string& query_text, const std::string& passage_text,
                                  const std::string& question, Answer answer);

/// `are you looking for {facet words}?`
std::string template_question(const Facet& facet);

/// Sends the cq prompt to the gateway /generate verb; empty generations are an
/// error (callers may fall back to template_question).
std::string remote_question(const GatewayClient& gateway, const std::string& query_text,
                            const std::string& facet_string);

/// Relevance-matched answer: yes iff the facet polarity is positive.
Answer heuristic_answer(const Facet& facet);

/// Deterministic local proxy for the neural user simulation: the question's
/// content tokens (minus query tokens and template boilerplate) are checked
/// for coverage by the intent passage; yes iff coverage >= theta.
Answer lexical_sim_answer(const std::string& query_text, const std::string& intent_text,
                          const std::string& question, double theta);

/// Gateway /answer verb; the response must normalize to exactly yes or no.
Answer remote_answer(const GatewayClient& gateway, const std::string& query_text,
                     const std::string& intent_text, const std::string& question);

struct GeneratedQuestion {
    std::string text;
    GenTag gen;
};

class QuestionGenerator {
  public:
    virtual ~QuestionGenerator() = default;
    virtual GeneratedQuestion question(const std::string& query_text, const Facet& facet) const = 0;
};

class TemplateQuestionGenerator: public QuestionGenerator {
  public:
    GeneratedQuestion question(const std::string& query_text, const Facet& facet) const override;
};

class RemoteQuestionGenerator: public QuestionGenerator {
  public:
    RemoteQuestionGenerator(std::shared_ptr<GatewayClient> gateway, bool fallback_to_template);
    GeneratedQuestion question(const std::string& query_text, const Facet& facet) const override;

  private:
    std::shared_ptr<GatewayClient> gateway_;
    bool fallback_;
};

class UserSimulator {
  public:
    virtual ~UserSimulator() = default;
    virtual Answer answer(const std::string& query_text, const std::string& intent_text,
                          const std::string& question) const = 0;
    virtual AnswerSource source() const = 0;
};

class LexicalSimUserSimulator: public UserSimulator {
  public:
    explicit LexicalSimUserSimulator(double theta = 0.6);
    Answer answer(const std::string& query_text, const std::string& intent_text,
                  const std::string& question) const override;
    AnswerSource source() const override { return AnswerSource::lexical_sim; }
    double theta() const { return theta_; }

  private:
    double theta_;
};

class RemoteUserSimulator: public UserSimulator {
  public:
    explicit RemoteUserSimulator(std::shared_ptr<GatewayClient> gateway);
    Answer answer(const std::string& query_text, const std::string& intent_text,
                  const std::string& question) const override;
    AnswerSource source() const override { return AnswerSource::remote; }

  private:
    std::shared_ptr<GatewayClient> gateway_;
};

}  // namespace miir
