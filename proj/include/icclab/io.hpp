#pragma once

// JSON tensor files, run configuration and report serialization.
//
// Tensor file: {"dim": n, "basis": "lex-2form", "matrix": [[...], ...]} with
// the symmetric N x N operator matrix, N = n(n-1)/2.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "icclab/cone_lab.hpp"
#include "icclab/curvature.hpp"
#include "icclab/flow.hpp"
#include "icclab/frame_search.hpp"
#include "icclab/soliton.hpp"

namespace icclab {

using Json = nlohmann::ordered_json;

struct LoadReport {
  Curvature tensor;
  double symmetry_residual = 0.0;  // max |M_ij - M_ji|
  double bianchi_residual = 0.0;
  std::string sha1;                // git blob hash of the file bytes
};

/// Throws ParseError on malformed input, DimMismatch on a wrong shape,
/// InconsistentSymmetry or BianchiViolation beyond 1e-12 (1 + max |M_ij|).
LoadReport parse_tensor(const std::string& text);
LoadReport load_tensor(const std::string& path);

Json tensor_to_json(const Curvature& r);

/// SHA-1 of "blob <size>\0" followed by the bytes, as git computes it.
std::string git_blob_sha1(const std::string& bytes);

std::string read_file(const std::string& path);

struct RunConfig {
  int dim = 5;
  std::uint64_t seed = 0x1CC1AB;
  SearchBudget budget;
  double theta = 0.0;  // 0: half the measured critical value where needed
  std::vector<double> b_grid = default_b_grid();
  std::string omega = "inverse";
  std::map<std::string, double> tolerances;
  std::string input;
  std::string output;
  std::string format = "json";
};

Json to_json(const RunConfig& c);
/// Overlays the keys present in `j` on `c`; unknown keys throw ParseError.
void merge_json(RunConfig& c, const Json& j);

Json to_json(const FrameConfig& f);
Json to_json(const MembershipReport& m, double scal, const SearchBudget& budget);
Json to_json(const P1Result& p);
Json to_json(const EbReport& e);
Json to_json(const PipelineReport& p);
Json to_json(const Lemma31Report& l);
Json to_json(const std::vector<Residual>& table);
Json to_json(const HypothesisReport& h);
Json to_json(const FlowTrajectory& t);

/// Pretty-printed with a trailing newline.
std::string dump(const Json& j);

}  // namespace icclab
