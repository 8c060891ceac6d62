#include "doctest.h"

#include "icclab/construct.hpp"
#include "icclab/io.hpp"

using namespace icclab;

namespace {

ErrorCode code_of(const std::string& text) {
  try {
    parse_tensor(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("git blob hash") {
  CHECK(git_blob_sha1("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
  CHECK(git_blob_sha1("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST_CASE("tensor round trip") {
  const auto r = random_tensor<double>(6, 11, RandomClass::BianchiGeneric);
  const std::string text = dump(tensor_to_json(r));
  const auto loaded = parse_tensor(text);
  CHECK(loaded.tensor.dim() == 6);
  CHECK((loaded.tensor.operator_matrix() - r.operator_matrix()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(loaded.symmetry_residual == 0.0);
  CHECK(loaded.bianchi_residual < 1e-14);
  CHECK(loaded.sha1 == git_blob_sha1(text));
}

TEST_CASE("tensor parse errors") {
  CHECK(code_of("{\"dim\": 4,") == ErrorCode::ParseError);
  CHECK(code_of("[1, 2]") == ErrorCode::ParseError);
  CHECK(code_of(R"({"dim": 4, "basis": "other", "matrix": []})") == ErrorCode::ParseError);
  CHECK(code_of(R"({"dim": 4, "basis": "lex-2form", "matrix": [[1]]})") == ErrorCode::DimMismatch);
  CHECK(code_of(R"({"basis": "lex-2form", "matrix": [[1]]})") == ErrorCode::ParseError);

  Json j = tensor_to_json(sphere_tensor(4, 1.0));
  j["matrix"][0][1] = 0.5;
  CHECK(code_of(j.dump()) == ErrorCode::InconsistentSymmetry);

  // R_1234 alone violates the first Bianchi identity
  Json b = tensor_to_json(Curvature(4));
  b["matrix"][pair_index(0, 1, 4)][pair_index(2, 3, 4)] = 1.0;
  b["matrix"][pair_index(2, 3, 4)][pair_index(0, 1, 4)] = 1.0;
  CHECK(code_of(b.dump()) == ErrorCode::BianchiViolation);

  Json s = tensor_to_json(sphere_tensor(4, 1.0));
  s["matrix"][0][0] = "x";
  CHECK(code_of(s.dump()) == ErrorCode::ParseError);
}

TEST_CASE("run config merge and serialization") {
  RunConfig c;
  merge_json(c, Json::parse(R"({"dim": 7, "seed": 42, "budget": {"restarts": 8}, "b_grid": [0.1, 0.01]})"));
  CHECK(c.dim == 7);
  CHECK(c.seed == 42);
  CHECK(c.budget.restarts == 8);
  CHECK(c.b_grid == std::vector<double>{0.1, 0.01});
  const Json j = to_json(c);
  RunConfig d;
  merge_json(d, j);
  CHECK(to_json(d) == j);
  CHECK_THROWS_AS(merge_json(c, Json::parse(R"({"bogus": 1})")), Error);
  CHECK_THROWS_AS(merge_json(c, Json::parse(R"({"dim": "five"})")), Error);
}

TEST_CASE("witness frames serialize row-major") {
  FrameConfig f;
  f.frame = Eigen::MatrixXd::Zero(4, 5);
  f.frame(0, 1) = 1.0;
  f.frame(1, 0) = 2.0;
  const Json j = to_json(f);
  CHECK(j["rows"] == 4);
  CHECK(j["cols"] == 5);
  CHECK(j["frame"][1] == 1.0);
  CHECK(j["frame"][5] == 2.0);
}
