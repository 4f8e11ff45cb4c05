#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "patchclf/crossing.hpp"
#include "patchclf/embedding.hpp"
#include "patchclf/error.hpp"
#include "patchclf/paragraph_vector.hpp"
#include "patchclf/random.hpp"
#include "patchclf/similarity.hpp"

using namespace patchclf;

TEST_CASE("cosine bounds and degenerate inputs") {
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    Eigen::VectorXd a(7), b(7);
    for (int i = 0; i < 7; ++i) {
      a(i) = normal(rng);
      b(i) = normal(rng);
    }
    const double c = cosine(a, b);
    CHECK(c >= -1.0);
    CHECK(c <= 1.0);
    CHECK(cosine(a, a) == doctest::Approx(1.0));
    CHECK(cosine(a, Eigen::VectorXd(-a)) == doctest::Approx(-1.0));
    CHECK(euclidean_similarity(a, a) == 1.0);
    CHECK(euclidean_similarity(a, b) > 0.0);
    CHECK(euclidean_similarity(a, b) < 1.0);
  }
  const auto z = cosine_flagged(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Ones(3));
  CHECK(z.degenerate);
  CHECK(z.value == 0.0);
  CHECK_THROWS_AS(cosine(Eigen::VectorXd::Ones(2), Eigen::VectorXd::Ones(3)), Error);
}

TEST_CASE("crossing layout") {
  Eigen::VectorXd b(3), p(3);
  b << 1, 2, 0;
  p << 3, -1, 2;
  const auto x = cross(b, p);
  REQUIRE(x.size() == 8);
  CHECK(x(0) == 2);
  CHECK(x(1) == -3);
  CHECK(x(2) == 2);
  CHECK(x(3) == 3);
  CHECK(x(4) == -2);
  CHECK(x(5) == 0);
  CHECK(x(6) == doctest::Approx(1.0 / (std::sqrt(5.0) * std::sqrt(14.0))));
  CHECK(x(7) == doctest::Approx(1.0 / (1.0 + std::sqrt(4.0 + 9.0 + 4.0))));
  const auto names = crossed_feature_names(3);
  CHECK(names.front() == "B-0");
  CHECK(names.back() == "B-7");
}

TEST_CASE("embedding import validation") {
  const auto ok = parse_embeddings(
      "{\"patch_id\":\"a\",\"buggy_vec\":[1,2],\"patched_vec\":[3,4]}\n"
      "{\"patch_id\":\"b\",\"buggy_vec\":[0,0],\"patched_vec\":[1,1]}\n");
  REQUIRE(ok.size() == 2);
  CHECK(ok[1].patched(1) == 1.0);
  CHECK(parse_embeddings(embeddings_to_jsonl(ok)).size() == 2);
  CHECK_THROWS_AS(parse_embeddings("{\"patch_id\":\"a\",\"buggy_vec\":[1,2],\"patched_vec\":[3]}\n"), Error);
  CHECK_THROWS_AS(parse_embeddings("{\"patch_id\":\"a\",\"buggy_vec\":[1,2],\"patched_vec\":[3,4]}\n"
                                   "{\"patch_id\":\"b\",\"buggy_vec\":[1,2,3],\"patched_vec\":[3,4,5]}\n"),
                  Error);
  CHECK_THROWS_AS(parse_embeddings("{\"patch_id\":\"a\",\"buggy_vec\":[1,\"x\"],\"patched_vec\":[3,4]}\n"), Error);
  CHECK_THROWS_AS(parse_embeddings(""), Error);
}

namespace {

std::vector<ParagraphVectorModel::Document> toy_documents() {
  std::vector<ParagraphVectorModel::Document> docs;
  for (int i = 0; i < 30; ++i) {
    if (i % 2 == 0) docs.push_back({"if", "(", "x", ">", "0", ")", "return", "x", ";"});
    else docs.push_back({"for", "(", "i", "=", "0", ";", "i", "<", "n", ";", "i", "++", ")"});
  }
  return docs;
}

}  // namespace

TEST_CASE("paragraph vectors train and infer deterministically") {
  ParagraphVectorConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 30;
  cfg.seed = 11;
  const auto docs = toy_documents();
  const auto m = ParagraphVectorModel::train(docs, cfg);
  CHECK(m.loss().final < m.loss().initial);
  CHECK(m.document_matrix().rows() == 30);

  const auto m2 = ParagraphVectorModel::train(docs, cfg);
  CHECK(m.word_matrix() == m2.word_matrix());

  const auto a = m.infer(docs[0]);
  const auto b = m.infer(docs[0]);
  CHECK_FALSE(a.warning);
  CHECK(a.vector == b.vector);
  CHECK(a.vector.size() == 8);

  const auto unknown = m.infer({"zzz", "qqq"});
  CHECK(unknown.warning);
  CHECK(unknown.vector.isZero());

  const auto restored = ParagraphVectorModel::from_json(m.to_json());
  CHECK(restored.infer(docs[1]).vector == m.infer(docs[1]).vector);
}

TEST_CASE("paragraph vector errors") {
  ParagraphVectorConfig cfg;
  cfg.dim = 1;
  CHECK_THROWS_AS(ParagraphVectorModel::train(toy_documents(), cfg), Error);
  cfg.dim = 4;
  cfg.min_token_count = 1000;
  CHECK_THROWS_AS(ParagraphVectorModel::train(toy_documents(), cfg), Error);
  cfg.min_token_count = 1;
  CHECK_THROWS_AS(ParagraphVectorModel::train({}, cfg), Error);
}
