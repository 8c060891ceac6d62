#include "icclab/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

namespace icclab {

namespace {

Json matrix_rows(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json optional_number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

template <typename T>
T get_field(const Json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

LoadReport parse_tensor(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "tensor file must hold a JSON object");
  const int n = get_field<int>(j, "dim");
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "dim must be at least 2");
  const auto basis = get_field<std::string>(j, "basis");
  if (basis != "lex-2form") throw Error(ErrorCode::ParseError, "unsupported basis '" + basis + "'");
  const Json& rows = j.at("matrix");
  const int nn = two_form_dim(n);
  if (!rows.is_array() || static_cast<int>(rows.size()) != nn) {
    throw Error(ErrorCode::DimMismatch, "matrix must have N = n(n-1)/2 rows");
  }
  Eigen::MatrixXd m(nn, nn);
  for (int i = 0; i < nn; ++i) {
    if (!rows[i].is_array() || static_cast<int>(rows[i].size()) != nn) {
      throw Error(ErrorCode::DimMismatch, "matrix row " + std::to_string(i) + " must have N entries");
    }
    for (int k = 0; k < nn; ++k) {
      if (!rows[i][k].is_number()) throw Error(ErrorCode::ParseError, "matrix entries must be numbers");
      m(i, k) = rows[i][k].get<double>();
    }
  }
  LoadReport out;
  const double scale = 1.0 + m.cwiseAbs().maxCoeff();
  out.symmetry_residual = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (out.symmetry_residual > 1e-12 * scale) {
    throw Error(ErrorCode::InconsistentSymmetry, "matrix is not symmetric");
  }
  out.bianchi_residual = bianchi_residual(n, m);
  if (out.bianchi_residual > 1e-12 * scale) {
    throw Error(ErrorCode::BianchiViolation, "first Bianchi residual " + std::to_string(out.bianchi_residual));
  }
  out.tensor = Curvature::from_operator(n, std::move(m), BianchiPolicy::Trust);
  out.sha1 = git_blob_sha1(text);
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

LoadReport load_tensor(const std::string& path) { return parse_tensor(read_file(path)); }

Json tensor_to_json(const Curvature& r) {
  Json j;
  j["dim"] = r.dim();
  j["basis"] = "lex-2form";
  j["matrix"] = matrix_rows(r.operator_matrix());
  return j;
}

std::string git_blob_sha1(const std::string& bytes) {
  const std::string header = "blob " + std::to_string(bytes.size()) + '\0';
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
  EVP_DigestUpdate(ctx, header.data(), header.size());
  EVP_DigestUpdate(ctx, bytes.data(), bytes.size());
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

Json to_json(const RunConfig& c) {
  Json j;
  j["dim"] = c.dim;
  j["seed"] = c.seed;
  j["budget"] = {{"restarts", c.budget.restarts},
                 {"iterations", c.budget.iterations},
                 {"seed", c.budget.seed},
                 {"grad_tol", c.budget.grad_tol},
                 {"coarse_grad_tol", c.budget.coarse_grad_tol},
                 {"oracle_samples", c.budget.oracle_samples},
                 {"tol_weak", c.budget.tol_weak},
                 {"tol_interior", c.budget.tol_interior}};
  j["theta"] = c.theta;
  j["b_grid"] = c.b_grid;
  j["omega"] = c.omega;
  j["tolerances"] = Json::object();
  for (const auto& [k, v] : c.tolerances) j["tolerances"][k] = v;
  j["input"] = c.input;
  j["output"] = c.output;
  j["format"] = c.format;
  return j;
}

void merge_json(RunConfig& c, const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "dim") c.dim = v.get<int>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "theta") c.theta = v.get<double>();
      else if (key == "b_grid") c.b_grid = v.get<std::vector<double>>();
      else if (key == "omega") c.omega = v.get<std::string>();
      else if (key == "input") c.input = v.get<std::string>();
      else if (key == "output") c.output = v.get<std::string>();
      else if (key == "format") c.format = v.get<std::string>();
      else if (key == "tolerances") c.tolerances = v.get<std::map<std::string, double>>();
      else if (key == "budget") {
        for (const auto& [bk, bv] : v.items()) {
          auto& b = c.budget;
          if (bk == "restarts") b.restarts = bv.get<int>();
          else if (bk == "iterations") b.iterations = bv.get<int>();
          else if (bk == "seed") b.seed = bv.get<std::uint64_t>();
          else if (bk == "grad_tol") b.grad_tol = bv.get<double>();
          else if (bk == "coarse_grad_tol") b.coarse_grad_tol = bv.get<double>();
          else if (bk == "oracle_samples") b.oracle_samples = bv.get<long>();
          else if (bk == "tol_weak") b.tol_weak = bv.get<double>();
          else if (bk == "tol_interior") b.tol_interior = bv.get<double>();
          else throw Error(ErrorCode::ParseError, "unknown budget key '" + bk + "'");
        }
      } else {
        throw Error(ErrorCode::ParseError, "unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

Json to_json(const FrameConfig& f) {
  Json j;
  j["rows"] = f.frame.rows();
  j["cols"] = f.frame.cols();
  Json data = Json::array();
  for (Eigen::Index i = 0; i < f.frame.rows(); ++i)
    for (Eigen::Index k = 0; k < f.frame.cols(); ++k) data.push_back(f.frame(i, k));
  j["frame"] = std::move(data);
  j["lambda"] = f.lambda;
  j["mu"] = f.mu;
  return j;
}

Json to_json(const MembershipReport& m, double scal, const SearchBudget& budget) {
  Json j;
  j["cone"] = to_string(m.mode);
  j["margin"] = m.margin;
  j["verdict"] = to_string(classify_margin(m.margin, scal, budget));
  j["witness"] = to_json(m.witness);
  j["restarts_used"] = m.restarts_used;
  j["refinement_iterations"] = m.refinement_iterations;
  j["converged"] = m.converged;
  j["oracle_gap"] = m.oracle_gap ? Json(*m.oracle_gap) : Json(nullptr);
  return j;
}

Json to_json(const P1Result& p) {
  Json j;
  j["value"] = p.value;
  j["infimum"] = p.infimum;
  j["witness"] = to_json(p.witness);
  j["pic_margin"] = p.pic_margin;
  j["lambda_tilde"] = p.lambda_tilde;
  j["lambda_cap"] = p.lambda_cap;
  j["lower_bound"] = optional_number(p.lower_bound);
  j["witness_lower_bound"] = optional_number(p.witness_lower_bound);
  j["interior"] = p.interior;
  j["stationarity_lambda"] = p.stationarity_lambda;
  j["stationarity_value"] = p.stationarity_value;
  j["restarts_used"] = p.restarts_used;
  j["refinement_iterations"] = p.refinement_iterations;
  j["converged"] = p.converged;
  return j;
}

Json to_json(const EbReport& e) {
  Json j;
  j["theta"] = e.theta;
  j["omega"] = e.omega;
  j["scal"] = e.scal;
  j["passes"] = e.passes();
  j["cond_i"] = e.cond_i;
  j["cond_ii"] = e.cond_ii;
  j["cond_iii"] = e.cond_iii;
  j["margin_i"] = e.margin_i;
  j["margin_ii"] = e.margin_ii;
  j["margin_iii"] = e.margin_iii;
  j["spread"] = e.spread;
  j["sampled_spread"] = e.sampled_spread;
  j["bound"] = e.bound;
  j["ricci_ratio"] = e.ricci_ratio;
  j["witness_i"] = to_json(e.witness_i);
  return j;
}

Json to_json(const PipelineReport& p) {
  Json j;
  j["theta"] = p.theta;
  j["uniform_margin"] = p.uniform_margin;
  j["ric_two_smallest"] = p.ric_two_smallest;
  j["ricci_ratio"] = p.ricci_ratio;
  Json rows = Json::array();
  for (const auto& r : p.rows) rows.push_back({{"b", r.b}, {"a", r.a}, {"omega", r.omega}, {"eb", to_json(r.eb)}});
  j["rows"] = std::move(rows);
  j["admissible_b"] = p.admissible_b ? Json(*p.admissible_b) : Json(nullptr);
  return j;
}

Json to_json(const Lemma31Report& l) {
  Json j;
  j["applicable"] = l.applicable;
  j["p1"] = to_json(l.p1);
  j["c"] = l.c;
  j["lambda"] = l.lambda;
  j["q_combination"] = l.q_combination;
  j["ricci_sum"] = l.ricci_sum;
  j["slack"] = l.slack;
  j["slack_tolerance"] = l.slack_tolerance;
  j["lifted_frame_value"] = l.lifted_frame_value;
  j["lifted_margin"] = l.lifted_margin;
  j["lifted_weakly_pic"] = l.lifted_weakly_pic;
  j["stationary"] = l.stationary;
  j["ok"] = l.ok;
  return j;
}

Json to_json(const std::vector<Residual>& table) {
  Json j = Json::object();
  for (const auto& r : table) j[r.name] = r.value;
  return j;
}

Json to_json(const HypothesisReport& h) {
  Json j;
  j["hessian_two_smallest"] = h.hessian_two_smallest;
  j["hessian_two_nonnegative"] = h.hessian_two_nonnegative;
  j["pic_margin"] = h.pic_margin;
  j["pic_verdict"] = to_string(h.pic_verdict);
  j["strictly_pic"] = h.strictly_pic;
  j["pic1_margin"] = h.pic1_margin;
  j["pic1_verdict"] = to_string(h.pic1_verdict);
  j["weakly_pic1"] = h.weakly_pic1;
  j["p1_value"] = h.p1_value ? Json(*h.p1_value) : Json(nullptr);
  j["witness_hessian_sum"] = h.witness_hessian_sum;
  j["witness_identity_residual"] = h.witness_identity_residual;
  j["r_star_ric_min_eig"] = h.r_star_ric_min_eig;
  j["hypotheses_hold"] = h.hypotheses_hold;
  return j;
}

Json to_json(const FlowTrajectory& t) {
  Json j;
  j["status"] = to_string(t.status);
  j["stop_reason"] = t.stop_reason;
  j["accepted"] = t.accepted;
  j["rejected"] = t.rejected;
  j["max_bianchi_drift"] = t.max_bianchi_drift;
  j["margins_converged"] = t.margins_converged;
  Json cones = Json::array();
  for (const auto& c : t.cones) cones.push_back(to_string(c));
  j["cones"] = std::move(cones);
  Json steps = Json::array();
  for (std::size_t i = 0; i < t.times.size(); ++i)
    steps.push_back({{"t", t.times[i]}, {"scal", scalar(t.states[i])}, {"margins", t.margins[i]}});
  j["steps"] = std::move(steps);
  return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace icclab
