#include <algorithm>
#include <map>
#include <optional>
#include <set>

#include "commands.hpp"
#include "mvpforge/cli.hpp"
#include "mvpforge/error.hpp"
#include "mvpforge/jsonl.hpp"
#include "mvpforge/metrics.hpp"

namespace mvpforge::cli {
namespace {

struct Row {
  std::string id;
  std::vector<std::string> texts;
};

std::string id_string(const nlohmann::json& id) {
  return id.is_string() ? id.get<std::string>() : id.dump();
}

// Hypothesis rows carry "text"; reference rows carry "texts" or, failing
// that, a single "text".
std::vector<Row> read_rows(const std::filesystem::path& path, bool references) {
  LineReader reader(path);
  std::vector<Row> rows;
  std::set<std::string> ids;
  std::string line;
  while (reader.next(line)) {
    if (split_whitespace(line).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(reader.line_number());
    const auto doc = nlohmann::json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("id")) {
      throw Error(ErrorKind::schema, "schema", where + ": expected an object with an \"id\"");
    }
    Row row{id_string(doc["id"]), {}};
    try {
      if (references && doc.contains("texts")) {
        row.texts = doc["texts"].get<std::vector<std::string>>();
      } else {
        row.texts.push_back(doc.at("text").get<std::string>());
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::schema, "schema", where + ": " + e.what());
    }
    if (references && row.texts.empty()) {
      throw Error(ErrorKind::schema, "schema", where + ": no reference texts");
    }
    if (!ids.insert(row.id).second) {
      throw Error(ErrorKind::validation, "duplicate-id", where + ": duplicate id " + row.id);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<std::string> expand_metrics(const std::vector<std::string>& requested,
                                        bool combined_inputs) {
  static const std::vector<std::string> kAll = {"bleu", "rouge", "meteor", "distinct", "em-f1"};
  std::vector<std::string> out;
  auto add = [&](const std::string& m) {
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  };
  if (requested.empty()) {
    for (const auto& m : kAll) add(m);
    if (combined_inputs) add("combined");
    return out;
  }
  for (const auto& m : requested) {
    if (m == "all") {
      for (const auto& a : kAll) add(a);
    } else if (m == "bleu" || m == "rouge" || m == "meteor" || m == "distinct" || m == "em-f1" ||
               m == "combined") {
      add(m);
    } else {
      throw Error(ErrorKind::config, "unknown-metric", "unknown metric '" + m + "'");
    }
  }
  return out;
}

std::vector<double> scaled(const std::vector<double>& xs) {
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back(round_to(100.0 * x, 2));
  return out;
}

}  // namespace

int cmd_evaluate(const EvaluateFlags& flags, std::ostream& out, std::ostream& err) {
  const auto hyps = read_rows(flags.hyp, false);
  const auto refs = read_rows(flags.ref, true);

  std::map<std::string, const Row*> ref_by_id;
  for (const auto& r : refs) ref_by_id[r.id] = &r;
  std::set<std::string> hyp_ids;
  for (const auto& h : hyps) hyp_ids.insert(h.id);
  std::vector<std::string> only_hyp, only_ref;
  for (const auto& h : hyp_ids) {
    if (!ref_by_id.count(h)) only_hyp.push_back(h);
  }
  for (const auto& [id, row] : ref_by_id) {
    if (!hyp_ids.count(id)) only_ref.push_back(id);
  }
  if (!only_hyp.empty() || !only_ref.empty()) {
    nlohmann::ordered_json diff;
    diff["error"] = "id-mismatch";
    diff["only_in_hypotheses"] = only_hyp;
    diff["only_in_references"] = only_ref;
    print_json(out, diff);
    err << "error: hypothesis and reference ids differ (" << only_hyp.size() << " only in "
        << flags.hyp.string() << ", " << only_ref.size() << " only in " << flags.ref.string()
        << ")\n";
    return kExitContent;
  }
  if (hyps.empty()) throw Error(ErrorKind::validation, "no-pairs", "no examples to score");

  std::vector<EvalPair> pairs;
  std::vector<std::string> hyp_texts;
  pairs.reserve(hyps.size());
  for (const auto& h : hyps) {
    pairs.push_back({h.texts.front(), ref_by_id.at(h.id)->texts});
    hyp_texts.push_back(h.texts.front());
  }

  const Tokenizer tok = parse_tokenizer(flags.tokenizer);
  const bool combined_inputs = flags.inform.has_value() || flags.success.has_value();
  const auto metrics = expand_metrics(flags.metrics, combined_inputs);

  nlohmann::ordered_json scores;
  nlohmann::ordered_json per_example;
  std::vector<std::string> notes;
  std::optional<double> computed_bleu;

  BleuOptions bopts;
  bopts.max_n = flags.max_n;
  bopts.mode = parse_bleu_mode(flags.mode);
  bopts.smoothing = parse_smoothing(flags.smoothing);
  bopts.tokenizer = tok;
  const std::string bleu_key = "bleu-" + std::to_string(flags.max_n);

  for (const auto& metric : metrics) {
    if (metric == "bleu") {
      computed_bleu = bleu(pairs, bopts);
      scores[bleu_key] = round_to(100.0 * *computed_bleu, 2);
      if (flags.per_example) per_example[bleu_key] = scaled(sentence_bleu_scores(pairs, bopts));
    } else if (metric == "rouge") {
      RougeOptions ropts{tok, flags.stem};
      const auto r1 = rouge_n_scores(pairs, 1, ropts);
      const auto r2 = rouge_n_scores(pairs, 2, ropts);
      const auto rl = rouge_l_scores(pairs, ropts);
      auto avg = [](const std::vector<double>& xs) {
        double s = 0;
        for (double x : xs) s += x;
        return s / static_cast<double>(xs.size());
      };
      scores["rouge-1"] = round_to(100.0 * avg(r1), 2);
      scores["rouge-2"] = round_to(100.0 * avg(r2), 2);
      scores["rouge-l"] = round_to(100.0 * avg(rl), 2);
      if (flags.per_example) {
        per_example["rouge-1"] = scaled(r1);
        per_example["rouge-2"] = scaled(r2);
        per_example["rouge-l"] = scaled(rl);
      }
    } else if (metric == "meteor") {
      MeteorParams mp;
      mp.tokenizer = tok;
      const auto ms = meteor_scores(pairs, mp);
      double s = 0;
      for (double x : ms) s += x;
      scores["meteor"] = round_to(100.0 * s / static_cast<double>(ms.size()), 2);
      if (flags.per_example) per_example["meteor"] = scaled(ms);
      notes.push_back("meteor: exact and Porter-stem matching only, no synonym stage");
    } else if (metric == "distinct") {
      for (int n : flags.distinct_orders) {
        if (n < 1) throw Error(ErrorKind::config, "bad-order", "distinct order must be >= 1");
        scores["distinct-" + std::to_string(n)] = round_to(100.0 * distinct_n(hyp_texts, n, tok), 2);
      }
    } else if (metric == "em-f1") {
      const auto ef = squad_em_f1(pairs);
      scores["em"] = round_to(100.0 * ef.em, 2);
      scores["f1"] = round_to(100.0 * ef.f1, 2);
      if (flags.per_example) {
        std::vector<double> em, f1;
        for (const auto& x : squad_em_f1_scores(pairs)) {
          em.push_back(x.em);
          f1.push_back(x.f1);
        }
        per_example["em"] = scaled(em);
        per_example["f1"] = scaled(f1);
      }
    }
  }
  if (std::find(metrics.begin(), metrics.end(), "combined") != metrics.end()) {
    if (!flags.inform || !flags.success) {
      throw Error(ErrorKind::config, "missing-flag", "combined needs --inform and --success");
    }
    double b = 0;
    if (flags.bleu) {
      b = *flags.bleu;
    } else {
      if (!computed_bleu) {
        BleuOptions corpus4;
        corpus4.tokenizer = tok;
        computed_bleu = bleu(pairs, corpus4);
      }
      b = 100.0 * *computed_bleu;
      notes.push_back("combined uses BLEU computed from the input files");
    }
    scores["combined"] = round_to(combined_score(b, *flags.inform, *flags.success), 3);
  }

  nlohmann::ordered_json report;
  report["count"] = pairs.size();
  report["scores"] = std::move(scores);
  nlohmann::ordered_json opts;
  opts["tokenizer"] = flags.tokenizer == "ws" ? "whitespace" : flags.tokenizer;
  opts["bleu_mode"] = flags.mode;
  opts["bleu_smoothing"] = flags.smoothing;
  opts["stem"] = flags.stem;
  report["options"] = std::move(opts);
  if (flags.per_example) {
    std::vector<std::string> ids;
    for (const auto& h : hyps) ids.push_back(h.id);
    report["ids"] = ids;
    report["per_example"] = std::move(per_example);
  }
  report["notes"] = notes;
  print_json(out, report);
  return kExitOk;
}

}  // namespace mvpforge::cli
