#include "patchclf/embedding.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "patchclf/error.hpp"

namespace patchclf {

using nlohmann::json;

namespace {

Eigen::VectorXd read_vector(const json& obj, const char* field, const std::string& where) {
  auto it = obj.find(field);
  if (it == obj.end() || !it->is_array()) {
    throw Error("embed", where + ": field '" + field + "' missing or not an array");
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(it->size()));
  for (std::size_t i = 0; i < it->size(); ++i) {
    const auto& e = (*it)[i];
    if (!e.is_number()) throw Error("embed", where + ": non-numeric entry in '" + field + "'");
    v(static_cast<Eigen::Index>(i)) = e.get<double>();
    if (!std::isfinite(v(static_cast<Eigen::Index>(i)))) {
      throw Error("embed", where + ": non-finite value in '" + field + "'");
    }
  }
  return v;
}

}  // namespace

std::vector<EmbeddingPair> parse_embeddings(std::string_view jsonl, const std::string& provider) {
  std::vector<EmbeddingPair> pairs;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  Eigen::Index n = -1;
  while (pos < jsonl.size()) {
    std::size_t end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl.size();
    const std::string_view line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    const std::string where = "line " + std::to_string(line_no);
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error("embed", where + ": parse error: " + e.what());
    }
    if (!obj.is_object() || !obj.contains("patch_id") || !obj["patch_id"].is_string()) {
      throw Error("embed", where + ": missing patch_id");
    }
    EmbeddingPair pair;
    pair.patch_id = obj["patch_id"].get<std::string>();
    const std::string who = where + " (patch_id " + pair.patch_id + ")";
    pair.buggy = read_vector(obj, "buggy_vec", who);
    pair.patched = read_vector(obj, "patched_vec", who);
    pair.provider = provider;
    if (pair.buggy.size() == 0) throw Error("embed", who + ": empty vector");
    if (n < 0) n = pair.buggy.size();
    if (pair.buggy.size() != n || pair.patched.size() != n) {
      throw Error("embed", who + ": vector length mismatch, expected " + std::to_string(n));
    }
    pairs.push_back(std::move(pair));
  }
  if (pairs.empty()) throw Error("embed", "no embeddings found");
  return pairs;
}

std::vector<EmbeddingPair> import_embeddings(const std::filesystem::path& path, const std::string& provider) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("embed", "cannot open " + path.string(), "check the embeddings path");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_embeddings(buf.str(), provider);
}

std::string embeddings_to_jsonl(const std::vector<EmbeddingPair>& pairs) {
  std::string out;
  for (const auto& p : pairs) {
    json obj;
    obj["patch_id"] = p.patch_id;
    obj["buggy_vec"] = std::vector<double>(p.buggy.data(), p.buggy.data() + p.buggy.size());
    obj["patched_vec"] = std::vector<double>(p.patched.data(), p.patched.data() + p.patched.size());
    out += obj.dump();
    out += '\n';
  }
  return out;
}

void export_embeddings(const std::vector<EmbeddingPair>& pairs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("embed", "cannot write " + path.string());
  out << embeddings_to_jsonl(pairs);
}

}  // namespace patchclf
