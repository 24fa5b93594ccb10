#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mvpforge/corpus_model.hpp"

namespace mvpforge {

// Task instruction prepended to every model-facing input. Families without
// an instruction (the held-out ones, unless configured) get no prefix.
class InstructionTable {
 public:
  static InstructionTable defaults();

  const std::string& get(TaskFamily family) const {
    return table_[static_cast<std::size_t>(family)];
  }
  void set(TaskFamily family, std::string instruction) {
    table_[static_cast<std::size_t>(family)] = std::move(instruction);
  }
  // Throws Error(config) if a seen family lacks an instruction.
  void validate() const;

 private:
  std::array<std::string, kAllFamilies.size()> table_;
};

// Which token sits between the answer and the paragraph in question
// generation inputs. The released example tables use `[SEP]`; the format
// description elsewhere uses `[X_SEP]`.
enum class AnswerParagraphSep { xsep, sep };

struct SeparatorConfig {
  std::string sep = "[SEP]";
  std::string xsep = "[X_SEP]";
  AnswerParagraphSep answer_paragraph = AnswerParagraphSep::xsep;

  void validate() const;
};

struct LintWarning {
  std::string code;
  std::string detail;
};
using LintLog = std::vector<LintWarning>;

// `s1 | r1 | o1 [SEP] s2 | r2 | o2 ...`
std::string linearize_triples(const TripleSet& triples,
                              const SeparatorConfig& seps,
                              LintLog* lint = nullptr);

// `k1 : v1 [SEP] k2 : v2 ...`, input order preserved.
std::string linearize_table(const KeyValueTable& table,
                            const SeparatorConfig& seps,
                            LintLog* lint = nullptr);

std::string compose_qg_input(std::string_view answer, std::string_view paragraph,
                             const SeparatorConfig& seps,
                             const InstructionTable& instr,
                             LintLog* lint = nullptr);

// Persona facts joined by sep, then xsep, then turns joined by sep. The
// persona block and its xsep are dropped when there is no persona.
std::string compose_dialogue_input(const std::vector<std::string>& persona,
                                   const std::vector<std::string>& turns,
                                   const SeparatorConfig& seps,
                                   const InstructionTable& instr,
                                   LintLog* lint = nullptr);

// `q1 [SEP] a1 [X_SEP] ... q [X_SEP] context`
std::string compose_qa_input(
    const std::vector<std::pair<std::string, std::string>>& history,
    std::string_view question, const std::optional<std::string>& context,
    const SeparatorConfig& seps, const InstructionTable& instr,
    LintLog* lint = nullptr);

// Inputs for the belief-state, dialogue-action and system-response
// sub-tasks, in that order.
std::array<std::string, 3> compose_tod_inputs(const TodRecord& tod,
                                              const SeparatorConfig& seps,
                                              const InstructionTable& instr,
                                              LintLog* lint = nullptr);

// Three examples for task-oriented dialogue, one for every other family.
std::vector<UnifiedExample> unify_record(const RawRecord& rec, TaskFamily family,
                                         const InstructionTable& instr,
                                         const SeparatorConfig& seps,
                                         LintLog* lint = nullptr);

}  // namespace mvpforge
