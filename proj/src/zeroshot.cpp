#include "llf/zeroshot.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace llf {

namespace {
using nlohmann::json;
}

const VocabularyClass* Vocabulary::find(std::uint16_t class_id) const {
  for (const VocabularyClass& c : classes)
    if (c.class_id == class_id) return &c;
  return nullptr;
}

bool Vocabulary::is_thing(std::uint16_t class_id) const {
  const VocabularyClass* c = find(class_id);
  return c != nullptr && c->is_thing;
}

std::size_t Vocabulary::prompt_count() const {
  std::size_t n = 0;
  for (const VocabularyClass& c : classes) n += c.prompts.size();
  return n;
}

Vocabulary load_vocabulary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }

  Vocabulary vocab;
  vocab.name = j.value("name", "");
  vocab.templates = j.value("templates", std::vector<std::string>{"{}"});
  std::set<std::uint16_t> ids;
  for (const json& c : j.at("classes")) {
    VocabularyClass vc;
    const int id = c.at("id").get<int>();
    if (id < 1 || id > 0xFFFF)
      throw FormatError(path + ": class id " + std::to_string(id) +
                        " outside [1, 65535]");
    vc.class_id = static_cast<std::uint16_t>(id);
    if (!ids.insert(vc.class_id).second)
      throw FormatError(path + ": duplicate class id " + std::to_string(id));
    vc.name = c.at("name").get<std::string>();
    vc.prompts = c.at("prompts").get<std::vector<std::string>>();
    if (vc.prompts.empty())
      throw FormatError(path + ": class " + vc.name + " has no prompts");
    vc.is_thing = c.at("thing").get<bool>();
    vc.super_class_id = static_cast<std::uint16_t>(c.value("super", 0));
    vocab.classes.push_back(std::move(vc));
  }
  if (vocab.classes.empty()) throw FormatError(path + ": no classes");
  return vocab;
}

std::vector<std::string> build_prompt_manifest(const Vocabulary& vocab) {
  if (vocab.classes.empty()) throw ConfigError("vocabulary has no classes");
  if (vocab.templates.empty()) throw ConfigError("template list is empty");
  for (const std::string& t : vocab.templates)
    if (t.find("{}") == std::string::npos)
      throw ConfigError("template \"" + t + "\" has no {} placeholder");

  std::vector<std::string> manifest;
  manifest.reserve(vocab.prompt_count() * vocab.templates.size());
  for (const VocabularyClass& c : vocab.classes)
    for (const std::string& prompt : c.prompts)
      for (const std::string& t : vocab.templates) {
        std::string s = t;
        s.replace(s.find("{}"), 2, prompt);
        manifest.push_back(std::move(s));
      }
  return manifest;
}

void load_prompt_embeddings(Vocabulary& vocab, const Eigen::MatrixXf& blob) {
  const std::size_t expected = vocab.prompt_count() * vocab.templates.size();
  if (static_cast<std::size_t>(blob.rows()) != expected)
    throw DataError("embedding blob has " + std::to_string(blob.rows()) +
                    " rows, manifest has " + std::to_string(expected));
  if (!blob.allFinite()) throw DataError("embedding blob has non-finite rows");

  const Eigen::Index t = static_cast<Eigen::Index>(vocab.templates.size());
  Eigen::MatrixXd per_prompt(static_cast<Eigen::Index>(vocab.prompt_count()),
                             blob.cols());
  Eigen::Index row = 0;
  Eigen::Index out = 0;
  for (const VocabularyClass& c : vocab.classes)
    for (std::size_t p = 0; p < c.prompts.size(); ++p) {
      Eigen::VectorXd mean =
          blob.middleRows(row, t).cast<double>().colwise().mean();
      const double norm = mean.norm();
      if (!(norm > 0.0))
        throw DataError("prompt \"" + c.prompts[p] + "\" of class " + c.name +
                        " has a zero-norm mean embedding");
      per_prompt.row(out++) = (mean / norm).transpose();
      row += t;
    }
  vocab.prompt_embeddings = std::move(per_prompt);
}

Eigen::VectorXd ClassScores::softmax(double temperature) const {
  Eigen::VectorXd scaled = scores / temperature;
  const double m = scaled.maxCoeff();
  Eigen::VectorXd e = (scaled.array() - m).exp();
  return e / e.sum();
}

ClassScores classify_token(const Token& token, const Vocabulary& vocab) {
  if (!vocab.has_embeddings())
    throw ConfigError("vocabulary embeddings not loaded");
  const double norm = token.norm();
  if (!(norm > 0.0) || !token.allFinite())
    throw DataError("token must be finite with positive norm");
  if (token.size() != vocab.prompt_embeddings.cols())
    throw DataError("token dimension " + std::to_string(token.size()) +
                    " does not match embeddings of dimension " +
                    std::to_string(vocab.prompt_embeddings.cols()));
  const Eigen::VectorXd unit = token / norm;

  ClassScores result;
  result.class_ids.reserve(vocab.classes.size());
  result.scores.resize(static_cast<Eigen::Index>(vocab.classes.size()));
  Eigen::Index row = 0;
  double best_score = -2.0;
  std::uint16_t best_id = 0;
  for (std::size_t c = 0; c < vocab.classes.size(); ++c) {
    const VocabularyClass& vc = vocab.classes[c];
    double score = -2.0;
    for (std::size_t p = 0; p < vc.prompts.size(); ++p, ++row)
      score = std::max(score, vocab.prompt_embeddings.row(row).dot(unit));
    result.class_ids.push_back(vc.class_id);
    result.scores(static_cast<Eigen::Index>(c)) = score;
    if (score > best_score ||
        (score == best_score && vc.class_id < best_id)) {
      best_score = score;
      best_id = vc.class_id;
    }
  }
  result.argmax_id = best_id;
  return result;
}

std::vector<std::size_t> prompt_query(const std::vector<LidarSegment>& segments,
                                      const Token& query_embedding,
                                      const Token& other_embedding) {
  if (query_embedding.size() == 0 || other_embedding.size() == 0)
    throw DataError("query and \"other\" embeddings are required");
  if (query_embedding.size() != other_embedding.size())
    throw DataError("query/other embedding dimensions differ");
  const double qn = query_embedding.norm();
  const double on = other_embedding.norm();
  if (!(qn > 0.0) || !(on > 0.0))
    throw DataError("query embeddings must have positive norm");
  const Eigen::VectorXd q = query_embedding / qn;
  const Eigen::VectorXd o = other_embedding / on;

  std::vector<std::size_t> selected;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const Token& t = segments[s].token;
    if (t.size() != q.size())
      throw DataError("segment token dimension mismatch");
    const double tn = t.norm();
    if (!(tn > 0.0)) throw DataError("segment token has zero norm");
    const Eigen::VectorXd unit = t / tn;
    if (unit.dot(q) > unit.dot(o)) selected.push_back(s);
  }
  return selected;
}

PanopticLabeling map_to_super_classes(const PanopticLabeling& labeling,
                                      const Vocabulary& vocab) {
  PanopticLabeling out = labeling;
  std::vector<std::int32_t> cache(0x10000, -1);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::uint16_t sem = out.semantic[i];
    if (sem == 0) continue;
    if (cache[sem] < 0) {
      const VocabularyClass* c = vocab.find(sem);
      if (c == nullptr)
        throw DataError("semantic id " + std::to_string(sem) +
                        " not in vocabulary \"" + vocab.name + "\"");
      if (c->super_class_id == 0)
        throw DataError("class " + c->name + " has no super class");
      cache[sem] = c->super_class_id;
    }
    out.semantic[i] = static_cast<std::uint16_t>(cache[sem]);
  }
  return out;
}

}  // namespace llf
