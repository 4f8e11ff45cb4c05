#include "patchclf/paragraph_vector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "patchclf/error.hpp"
#include "patchclf/random.hpp"

namespace patchclf {

using nlohmann::json;

void to_json(json& j, const ParagraphVectorConfig& c) {
  j = json{{"dim", c.dim},
           {"epochs", c.epochs},
           {"negative_samples", c.negative_samples},
           {"learning_rate", c.learning_rate},
           {"min_token_count", c.min_token_count},
           {"seed", c.seed}};
}

void from_json(const json& j, ParagraphVectorConfig& c) {
  const ParagraphVectorConfig d;
  c.dim = j.value("dim", d.dim);
  c.epochs = j.value("epochs", d.epochs);
  c.negative_samples = j.value("negative_samples", d.negative_samples);
  c.learning_rate = j.value("learning_rate", d.learning_rate);
  c.min_token_count = j.value("min_token_count", d.min_token_count);
  c.seed = j.value("seed", d.seed);
}

namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// -log(sigmoid(x)), stable for large |x|.
double neg_log_sigmoid(double x) { return x > 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x)); }

std::uint64_t fnv1a(const std::vector<std::string>& tokens) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& t : tokens) {
    for (unsigned char c : t) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h ^= 0xff;
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct Sgd {
  const ParagraphVectorModel::RowMatrix* words;
  const std::vector<double>* noise_cdf;
  int negatives;

  int draw(Rng& rng) const {
    const double u = uniform01(rng);
    auto it = std::upper_bound(noise_cdf->begin(), noise_cdf->end(), u);
    if (it == noise_cdf->end()) --it;
    return static_cast<int>(it - noise_cdf->begin());
  }

  // One pass over `tokens` for document vector `doc`. When `word_grad` is
  // non-null the output vectors are updated too (training). Returns the
  // summed loss and number of scored targets.
  std::pair<double, std::size_t> step(Eigen::Ref<Eigen::VectorXd> doc, const std::vector<int>& tokens, double lr,
                                      Rng& rng, ParagraphVectorModel::RowMatrix* word_grad) const {
    double loss = 0.0;
    std::size_t scored = 0;
    Eigen::VectorXd doc_update(doc.size());
    for (int target : tokens) {
      doc_update.setZero();
      for (int s = 0; s <= negatives; ++s) {
        int word = target;
        double label = 1.0;
        if (s > 0) {
          word = draw(rng);
          if (word == target) continue;
          label = 0.0;
        }
        const auto& w = *words;
        const double f = doc.dot(w.row(word));
        loss += label > 0 ? neg_log_sigmoid(f) : neg_log_sigmoid(-f);
        ++scored;
        const double g = (label - sigmoid(f)) * lr;
        doc_update.noalias() += g * w.row(word).transpose();
        if (word_grad) word_grad->row(word).noalias() += g * doc.transpose();
      }
      doc += doc_update;
    }
    return {loss, scored};
  }
};

}  // namespace

int ParagraphVectorModel::index_of(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? -1 : it->second;
}

std::vector<int> ParagraphVectorModel::encode(const Document& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) {
    const int id = index_of(t);
    if (id >= 0) ids.push_back(id);
  }
  return ids;
}

void ParagraphVectorModel::build_noise_table() {
  noise_cdf_.resize(counts_.size());
  double total = 0.0;
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    total += std::pow(static_cast<double>(counts_[i]), 0.75);
    noise_cdf_[i] = total;
  }
  for (auto& v : noise_cdf_) v /= total;
}

ParagraphVectorModel ParagraphVectorModel::train(const std::vector<Document>& documents,
                                                 const ParagraphVectorConfig& config) {
  if (config.dim < 2) throw Error("embed", "embedding dimension must be >= 2");
  if (config.epochs < 1) throw Error("embed", "epochs must be >= 1");
  if (documents.empty()) throw Error("embed", "empty training corpus");

  std::map<std::string, std::int64_t> freq;
  for (const auto& doc : documents) {
    for (const auto& t : doc) ++freq[t];
  }

  ParagraphVectorModel model;
  model.config_ = config;
  for (const auto& [token, count] : freq) {
    if (count >= config.min_token_count) {
      model.index_.emplace(token, static_cast<int>(model.vocab_.size()));
      model.vocab_.push_back(token);
      model.counts_.push_back(count);
    }
  }
  if (model.vocab_.size() < 2) {
    throw Error("embed", "vocabulary has " + std::to_string(model.vocab_.size()) + " token(s) above min_token_count",
                "lower min_token_count or provide more text");
  }
  model.build_noise_table();

  const auto n = static_cast<Eigen::Index>(config.dim);
  const auto vocab = static_cast<Eigen::Index>(model.vocab_.size());
  const auto ndocs = static_cast<Eigen::Index>(documents.size());
  model.words_ = RowMatrix::Zero(vocab, n);
  model.docs_.resize(ndocs, n);

  Rng rng(config.seed);
  for (Eigen::Index d = 0; d < ndocs; ++d) {
    for (Eigen::Index k = 0; k < n; ++k) model.docs_(d, k) = (uniform01(rng) - 0.5) / static_cast<double>(n);
  }

  std::vector<std::vector<int>> encoded;
  encoded.reserve(documents.size());
  for (const auto& doc : documents) encoded.push_back(model.encode(doc));

  std::vector<std::size_t> order(documents.size());
  std::iota(order.begin(), order.end(), 0);
  const Sgd sgd{&model.words_, &model.noise_cdf_, config.negative_samples};
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = std::max(config.learning_rate * (1.0 - static_cast<double>(epoch) / config.epochs),
                               config.learning_rate * 1e-4);
    shuffle(order.begin(), order.end(), rng);
    double loss = 0.0;
    std::size_t scored = 0;
    for (std::size_t d : order) {
      auto [l, s] = sgd.step(model.docs_.row(static_cast<Eigen::Index>(d)).transpose(), encoded[d], lr, rng,
                             &model.words_);
      loss += l;
      scored += s;
    }
    const double mean = scored ? loss / static_cast<double>(scored) : 0.0;
    if (!std::isfinite(mean)) throw Error("embed", "non-finite training loss", "lower the learning rate");
    if (epoch == 0) model.loss_.initial = mean;
    model.loss_.final = mean;
  }
  return model;
}

ParagraphVectorModel::Inference ParagraphVectorModel::infer(const Document& tokens) const {
  const auto n = static_cast<Eigen::Index>(config_.dim);
  const auto ids = encode(tokens);
  Inference result{Eigen::VectorXd::Zero(n), false};
  if (ids.empty()) {
    result.warning = true;
    return result;
  }
  Rng rng(mix_seed(config_.seed, fnv1a(tokens)));
  for (Eigen::Index k = 0; k < n; ++k) result.vector(k) = (uniform01(rng) - 0.5) / static_cast<double>(n);

  const Sgd sgd{&words_, &noise_cdf_, config_.negative_samples};
  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    const double lr = std::max(config_.learning_rate * (1.0 - static_cast<double>(epoch) / config_.epochs),
                               config_.learning_rate * 1e-4);
    sgd.step(result.vector, ids, lr, rng, nullptr);
  }
  return result;
}

namespace {

json matrix_to_json(const ParagraphVectorModel::RowMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    rows.push_back(std::move(row));
  }
  return rows;
}

ParagraphVectorModel::RowMatrix matrix_from_json(const json& rows, Eigen::Index cols) {
  ParagraphVectorModel::RowMatrix m(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != static_cast<std::size_t>(cols)) throw Error("embed", "model matrix row has wrong width");
    for (Eigen::Index c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

}  // namespace

json ParagraphVectorModel::to_json() const {
  json j;
  j["format"] = "patchclf.paragraph_vector";
  j["version"] = 1;
  j["config"] = config_;
  j["vocabulary"] = vocab_;
  j["counts"] = counts_;
  j["word_matrix"] = matrix_to_json(words_);
  j["document_matrix"] = matrix_to_json(docs_);
  j["loss"] = {{"initial", loss_.initial}, {"final", loss_.final}};
  return j;
}

ParagraphVectorModel ParagraphVectorModel::from_json(const json& j) {
  if (j.value("format", "") != "patchclf.paragraph_vector" || j.value("version", 0) != 1) {
    throw Error("embed", "not a version-1 paragraph vector model");
  }
  ParagraphVectorModel m;
  m.config_ = j.at("config").get<ParagraphVectorConfig>();
  m.vocab_ = j.at("vocabulary").get<std::vector<std::string>>();
  m.counts_ = j.at("counts").get<std::vector<std::int64_t>>();
  if (m.counts_.size() != m.vocab_.size()) throw Error("embed", "vocabulary/count size mismatch");
  for (std::size_t i = 0; i < m.vocab_.size(); ++i) m.index_.emplace(m.vocab_[i], static_cast<int>(i));
  m.words_ = matrix_from_json(j.at("word_matrix"), m.config_.dim);
  if (m.words_.rows() != static_cast<Eigen::Index>(m.vocab_.size())) throw Error("embed", "word matrix size mismatch");
  m.docs_ = matrix_from_json(j.at("document_matrix"), m.config_.dim);
  m.loss_.initial = j.at("loss").at("initial").get<double>();
  m.loss_.final = j.at("loss").at("final").get<double>();
  m.build_noise_table();
  return m;
}

void ParagraphVectorModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("embed", "cannot write " + path.string());
  out << to_json().dump() << '\n';
}

ParagraphVectorModel ParagraphVectorModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("embed", "cannot open " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw Error("embed", "malformed model file " + path.string() + ": " + e.what());
  }
}

}  // namespace patchclf
