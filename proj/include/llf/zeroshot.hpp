#pragma once

#include "llf/types.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace llf {

struct VocabularyClass {
  std::uint16_t class_id = 0;  // >= 1; 0 is reserved for void
  std::string name;
  std::vector<std::string> prompts;
  bool is_thing = false;
  std::uint16_t super_class_id = 0;
};

// Class list with prompt sets and externally computed prompt embeddings.
// Immutable after load; classification is pure.
struct Vocabulary {
  std::string name;
  std::vector<VocabularyClass> classes;
  // Sentence patterns with one "{}" placeholder, applied to every prompt.
  std::vector<std::string> templates;
  // One unit-norm row per (class, prompt), in class-then-prompt order.
  Eigen::MatrixXd prompt_embeddings;

  bool has_embeddings() const { return prompt_embeddings.rows() > 0; }
  const VocabularyClass* find(std::uint16_t class_id) const;
  bool is_thing(std::uint16_t class_id) const;
  std::size_t prompt_count() const;
};

// Vocabulary definition from JSON (see data/ for the shipped defaults).
Vocabulary load_vocabulary(const std::string& path);

// Every (class, prompt, template) instantiation, ordered by class, then
// prompt, then template index. These exact strings are fed to the external
// text encoder; the row order of the returned list defines the embedding
// blob layout. Throws ConfigError for templates without a placeholder or an
// empty class/template list.
std::vector<std::string> build_prompt_manifest(const Vocabulary& vocab);

// Consumes an embedding blob with one row per manifest entry: rows of each
// (class, prompt) group are averaged over templates and renormalized to
// unit length. Throws DataError on row-count mismatch.
void load_prompt_embeddings(Vocabulary& vocab, const Eigen::MatrixXf& blob);

struct ClassScores {
  std::vector<std::uint16_t> class_ids;  // aligned with scores
  Eigen::VectorXd scores;                // cosine per class, in [-1, 1]
  std::uint16_t argmax_id = 0;

  // Display-only probabilities; the argmax is taken on raw cosines.
  Eigen::VectorXd softmax(double temperature) const;
};

inline constexpr double kDisplaySoftmaxTemperature = 0.01;

// Per-class score = max cosine over the class's prompt embeddings; argmax
// ties break toward the lower class id. Throws DataError for a zero-norm
// token and ConfigError when embeddings are not loaded.
ClassScores classify_token(const Token& token, const Vocabulary& vocab);

// Positions of segments whose token matches `query` strictly better than
// the broad background embedding for "other".
std::vector<std::size_t> prompt_query(const std::vector<LidarSegment>& segments,
                                      const Token& query_embedding,
                                      const Token& other_embedding);

// Rewrites semantic ids to super-class ids; instance ids are untouched and
// void stays void. Throws DataError for a semantic id missing from the
// vocabulary or lacking a super class.
PanopticLabeling map_to_super_classes(const PanopticLabeling& labeling,
                                      const Vocabulary& vocab);

}  // namespace llf
