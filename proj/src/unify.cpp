#include "mvpforge/unify.hpp"

#include "mvpforge/error.hpp"
#include "mvpforge/text.hpp"

namespace mvpforge {

namespace {

constexpr std::string_view kSpecialTokenInField = "special-token-in-field";
constexpr std::string_view kEmptyValue = "empty-value";

// Special tokens inside a field are kept verbatim; they only get reported.
void check_field(std::string_view field, std::string_view what,
                 const SeparatorConfig& seps, LintLog* lint) {
  if (!lint) return;
  if (field.find(seps.sep) != std::string_view::npos ||
      field.find(seps.xsep) != std::string_view::npos) {
    lint->push_back({std::string(kSpecialTokenInField),
                     std::string(what) + " contains a separator token"});
  }
}

std::string with_instruction(const InstructionTable& instr, TaskFamily family,
                             std::string_view body) {
  const std::string& prefix = instr.get(family);
  if (prefix.empty()) return std::string(body);
  std::string out;
  out.reserve(prefix.size() + 1 + body.size());
  out.append(prefix).append(" ").append(body);
  return out;
}

std::string spaced(std::string_view token) {
  std::string out(" ");
  out.append(token).append(" ");
  return out;
}

std::string join_turns(const std::vector<std::string>& turns,
                       const SeparatorConfig& seps, std::string_view what,
                       LintLog* lint) {
  for (const auto& t : turns) check_field(t, what, seps, lint);
  return join(turns, spaced(seps.sep));
}

}  // namespace

InstructionTable InstructionTable::defaults() {
  InstructionTable t;
  t.set(TaskFamily::summarization, "Summarize:");
  t.set(TaskFamily::data_to_text, "Describe the following data:");
  t.set(TaskFamily::question_generation, "Generate the question based on the answer:");
  t.set(TaskFamily::question_answering, "Answer the following question:");
  t.set(TaskFamily::story_generation, "Given the story title:");
  t.set(TaskFamily::open_dialogue, "Given the dialog:");
  t.set(TaskFamily::task_oriented_dialogue, "Given the task dialog:");
  return t;
}

void InstructionTable::validate() const {
  for (TaskFamily f : kAllFamilies) {
    if (is_seen(f) && get(f).empty()) {
      throw Error(ErrorKind::config, "missing-instruction",
                  "no instruction for seen task '" + std::string(family_name(f)) + "'");
    }
  }
}

void SeparatorConfig::validate() const {
  if (sep.empty() || xsep.empty()) {
    throw Error(ErrorKind::config, "bad-separator", "separator tokens must be non-empty");
  }
  if (sep == xsep) {
    throw Error(ErrorKind::config, "bad-separator", "sep and xsep must differ");
  }
}

std::string linearize_triples(const TripleSet& triples, const SeparatorConfig& seps,
                              LintLog* lint) {
  if (triples.empty()) {
    throw Error(ErrorKind::data, "empty-structure", "triple set is empty");
  }
  std::string out;
  const std::string glue = spaced(seps.sep);
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const Triple& t = triples[i];
    check_field(t.subject, "triple subject", seps, lint);
    check_field(t.relation, "triple relation", seps, lint);
    check_field(t.object, "triple object", seps, lint);
    if (i) out += glue;
    out.append(t.subject).append(" | ").append(t.relation).append(" | ").append(t.object);
  }
  return out;
}

std::string linearize_table(const KeyValueTable& table, const SeparatorConfig& seps,
                            LintLog* lint) {
  if (table.empty()) {
    throw Error(ErrorKind::data, "empty-structure", "key-value table is empty");
  }
  std::string out;
  const std::string glue = spaced(seps.sep);
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& [key, value] = table[i];
    check_field(key, "table key", seps, lint);
    check_field(value, "table value", seps, lint);
    if (lint && value.empty()) {
      lint->push_back({std::string(kEmptyValue), "table key '" + key + "' has an empty value"});
    }
    if (i) out += glue;
    out.append(key).append(" : ").append(value);
  }
  return out;
}

std::string compose_qg_input(std::string_view answer, std::string_view paragraph,
                             const SeparatorConfig& seps, const InstructionTable& instr,
                             LintLog* lint) {
  if (answer.empty() || paragraph.empty()) {
    throw Error(ErrorKind::data, "empty-field",
                "question generation needs a non-empty answer and paragraph");
  }
  check_field(answer, "answer", seps, lint);
  check_field(paragraph, "paragraph", seps, lint);
  const std::string& token =
      seps.answer_paragraph == AnswerParagraphSep::sep ? seps.sep : seps.xsep;
  std::string body(answer);
  body.append(spaced(token)).append(paragraph);
  return with_instruction(instr, TaskFamily::question_generation, body);
}

std::string compose_dialogue_input(const std::vector<std::string>& persona,
                                   const std::vector<std::string>& turns,
                                   const SeparatorConfig& seps,
                                   const InstructionTable& instr, LintLog* lint) {
  if (turns.empty()) {
    throw Error(ErrorKind::data, "empty-dialogue", "dialogue has no turns");
  }
  std::string body;
  if (!persona.empty()) {
    body = join_turns(persona, seps, "persona fact", lint);
    body += spaced(seps.xsep);
  }
  body += join_turns(turns, seps, "dialogue turn", lint);
  return with_instruction(instr, TaskFamily::open_dialogue, body);
}

std::string compose_qa_input(
    const std::vector<std::pair<std::string, std::string>>& history,
    std::string_view question, const std::optional<std::string>& context,
    const SeparatorConfig& seps, const InstructionTable& instr, LintLog* lint) {
  if (question.empty()) {
    throw Error(ErrorKind::data, "empty-field", "question is empty");
  }
  const std::string sep = spaced(seps.sep);
  const std::string xsep = spaced(seps.xsep);
  std::string body;
  for (const auto& [q, a] : history) {
    check_field(q, "history question", seps, lint);
    check_field(a, "history answer", seps, lint);
    body.append(q).append(sep).append(a).append(xsep);
  }
  check_field(question, "question", seps, lint);
  body.append(question);
  if (context && !context->empty()) {
    check_field(*context, "context", seps, lint);
    body.append(xsep).append(*context);
  }
  return with_instruction(instr, TaskFamily::question_answering, body);
}

std::array<std::string, 3> compose_tod_inputs(const TodRecord& tod,
                                              const SeparatorConfig& seps,
                                              const InstructionTable& instr,
                                              LintLog* lint) {
  if (tod.history.empty()) {
    throw Error(ErrorKind::data, "empty-dialogue", "task dialogue has no history");
  }
  const std::string xsep = spaced(seps.xsep);
  const std::string history = join_turns(tod.history, seps, "dialogue turn", lint);
  // The database marker is only visible to the action and response sub-tasks.
  std::string db_block;
  if (!tod.db_marker.empty()) db_block = tod.db_marker + xsep;

  auto make = [&](std::string_view tag, bool with_db) {
    std::string body(tag);
    body += xsep;
    if (with_db) body += db_block;
    body += history;
    return with_instruction(instr, TaskFamily::task_oriented_dialogue, body);
  };
  return {make("Belief state", false), make("Dialogue action", true),
          make("System response", true)};
}

std::vector<UnifiedExample> unify_record(const RawRecord& rec, TaskFamily family,
                                         const InstructionTable& instr,
                                         const SeparatorConfig& seps, LintLog* lint) {
  if (!payload_matches(rec.payload, family)) {
    throw Error(ErrorKind::data, "payload-mismatch",
                "payload '" + std::string(payload_kind(rec.payload)) +
                    "' does not match task family '" + std::string(family_name(family)) +
                    "'");
  }

  auto example = [&](std::string input, std::string output) {
    UnifiedExample ex;
    ex.task = family;
    ex.dataset_id = rec.dataset_id;
    ex.split = rec.split;
    ex.instruction = instr.get(family);
    ex.input = std::move(input);
    ex.output = std::move(output);
    return ex;
  };

  std::vector<UnifiedExample> out;
  if (const auto* triples = std::get_if<TripleSet>(&rec.payload)) {
    out.push_back(example(with_instruction(instr, family, linearize_triples(*triples, seps, lint)),
                          rec.target));
  } else if (const auto* table = std::get_if<KeyValueTable>(&rec.payload)) {
    out.push_back(example(with_instruction(instr, family, linearize_table(*table, seps, lint)),
                          rec.target));
  } else if (const auto* dlg = std::get_if<DialogueContext>(&rec.payload)) {
    out.push_back(example(compose_dialogue_input(dlg->persona, dlg->turns, seps, instr, lint),
                          rec.target));
  } else if (const auto* qa = std::get_if<QATuple>(&rec.payload)) {
    if (family == TaskFamily::question_generation) {
      out.push_back(example(
          compose_qg_input(qa->answer.value_or(""), qa->context.value_or(""), seps, instr, lint),
          qa->question));
    } else {
      out.push_back(example(
          compose_qa_input(qa->history, qa->question, qa->context, seps, instr, lint),
          qa->answer.value_or("")));
    }
  } else if (const auto* tod = std::get_if<TodRecord>(&rec.payload)) {
    auto inputs = compose_tod_inputs(*tod, seps, instr, lint);
    out.push_back(example(std::move(inputs[0]), tod->belief));
    out.push_back(example(std::move(inputs[1]), tod->action));
    out.push_back(example(std::move(inputs[2]), tod->response));
  } else if (const auto* pair = std::get_if<PlainPair>(&rec.payload)) {
    check_field(pair->source, "source", seps, lint);
    out.push_back(example(with_instruction(instr, family, pair->source), pair->target));
  }
  return out;
}

}  // namespace mvpforge
