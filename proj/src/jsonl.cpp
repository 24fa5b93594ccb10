#include "mvpforge/jsonl.hpp"

#include "json.hpp"
#include "mvpforge/error.hpp"

namespace mvpforge {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void schema_error(std::string_view where, const std::string& what) {
  std::string msg = where.empty() ? what : std::string(where) + ": " + what;
  throw Error(ErrorKind::schema, "schema", msg);
}

json parse_object(std::string_view line, std::string_view where) {
  json doc = json::parse(line, nullptr, false);
  if (doc.is_discarded()) schema_error(where, "invalid JSON");
  if (!doc.is_object()) schema_error(where, "expected a JSON object");
  return doc;
}

std::string get_string(const json& doc, const char* key, std::string_view where) {
  auto it = doc.find(key);
  if (it == doc.end()) schema_error(where, std::string("missing key '") + key + "'");
  if (!it->is_string()) schema_error(where, std::string("key '") + key + "' must be a string");
  return it->get<std::string>();
}

std::optional<std::string> opt_string(const json& doc, const char* key,
                                      std::string_view where) {
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) schema_error(where, std::string("key '") + key + "' must be a string");
  return it->get<std::string>();
}

std::vector<std::string> string_list(const json& doc, const char* key,
                                     std::string_view where, bool required) {
  std::vector<std::string> out;
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) {
    if (required) schema_error(where, std::string("missing key '") + key + "'");
    return out;
  }
  if (!it->is_array()) schema_error(where, std::string("key '") + key + "' must be an array");
  for (const auto& v : *it) {
    if (!v.is_string()) schema_error(where, std::string("'") + key + "' entries must be strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::vector<std::vector<std::string>> tuple_list(const json& doc, const char* key,
                                                 std::size_t arity,
                                                 std::string_view where,
                                                 bool required) {
  std::vector<std::vector<std::string>> out;
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) {
    if (required) schema_error(where, std::string("missing key '") + key + "'");
    return out;
  }
  if (!it->is_array()) schema_error(where, std::string("key '") + key + "' must be an array");
  for (const auto& row : *it) {
    if (!row.is_array() || row.size() != arity) {
      schema_error(where, std::string("'") + key + "' entries must be arrays of " +
                              std::to_string(arity) + " strings");
    }
    std::vector<std::string> fields;
    for (const auto& v : row) {
      if (!v.is_string()) schema_error(where, std::string("'") + key + "' fields must be strings");
      fields.push_back(v.get<std::string>());
    }
    out.push_back(std::move(fields));
  }
  return out;
}

}  // namespace

std::string to_json_line(const UnifiedExample& ex) {
  ordered_json j;
  j["task"] = family_name(ex.task);
  j["dataset"] = ex.dataset_id;
  j["split"] = split_name(ex.split);
  j["instruction"] = ex.instruction;
  j["input"] = ex.input;
  j["output"] = ex.output;
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

UnifiedExample parse_example_line(std::string_view line, std::string_view where) {
  json doc = parse_object(line, where);
  UnifiedExample ex;
  try {
    ex.task = parse_family(get_string(doc, "task", where));
    ex.split = parse_split(get_string(doc, "split", where));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::schema) throw;
    schema_error(where, e.what());
  }
  ex.dataset_id = get_string(doc, "dataset", where);
  ex.instruction = get_string(doc, "instruction", where);
  ex.input = get_string(doc, "input", where);
  ex.output = get_string(doc, "output", where);
  return ex;
}

RawRecord parse_raw_line(std::string_view line, TaskFamily family,
                         std::string dataset_id, Split split,
                         std::string_view where) {
  json doc = parse_object(line, where);
  RawRecord rec;
  rec.dataset_id = std::move(dataset_id);
  rec.split = split;
  rec.target = opt_string(doc, "target", where).value_or("");

  switch (family) {
    case TaskFamily::data_to_text: {
      if (doc.contains("triples")) {
        TripleSet triples;
        for (auto& t : tuple_list(doc, "triples", 3, where, true)) {
          triples.push_back({t[0], t[1], t[2]});
        }
        rec.payload = std::move(triples);
      } else if (doc.contains("table")) {
        KeyValueTable table;
        for (auto& kv : tuple_list(doc, "table", 2, where, true)) {
          table.emplace_back(kv[0], kv[1]);
        }
        rec.payload = std::move(table);
      } else {
        schema_error(where, "data-to-text record needs 'triples' or 'table'");
      }
      break;
    }
    case TaskFamily::open_dialogue: {
      DialogueContext dlg;
      dlg.persona = string_list(doc, "persona", where, false);
      dlg.turns = string_list(doc, "turns", where, true);
      rec.payload = std::move(dlg);
      break;
    }
    case TaskFamily::question_answering:
    case TaskFamily::question_generation: {
      QATuple qa;
      if (family == TaskFamily::question_answering) {
        qa.question = get_string(doc, "question", where);
      } else {
        qa.question = opt_string(doc, "question", where).value_or("");
      }
      qa.answer = opt_string(doc, "answer", where);
      qa.context = opt_string(doc, "context", where);
      for (auto& h : tuple_list(doc, "history", 2, where, false)) {
        qa.history.emplace_back(h[0], h[1]);
      }
      rec.payload = std::move(qa);
      break;
    }
    case TaskFamily::task_oriented_dialogue: {
      TodRecord tod;
      tod.history = string_list(doc, "history", where, true);
      tod.db_marker = opt_string(doc, "db", where).value_or("");
      tod.belief = opt_string(doc, "belief", where).value_or("");
      tod.action = opt_string(doc, "action", where).value_or("");
      tod.response = opt_string(doc, "response", where).value_or("");
      rec.payload = std::move(tod);
      break;
    }
    default: {
      PlainPair pair;
      pair.source = get_string(doc, "source", where);
      pair.target = rec.target;
      rec.payload = std::move(pair);
      break;
    }
  }
  return rec;
}

LineReader::LineReader(const std::filesystem::path& path)
    : path_(path), in_(path, std::ios::binary) {
  if (!in_) throw Error(ErrorKind::io, "missing-file", "cannot open " + path.string());
}

bool LineReader::next(std::string& line) {
  if (!std::getline(in_, line)) return false;
  ++line_no_;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "unwritable", "cannot write " + path.string());
  return out;
}

}  // namespace mvpforge
