#pragma once

// Persistence, configuration and the command runner behind the CLI.
//
// NCF1 table format, little-endian:
//   "NCF1" | u64 N | u32 kind | u32 elem_size | u32 prov_len | provenance | values
// Values run over n = 1..N.  elem_size is 1 (int8: μ, λ), 4 (u32: Λ as the
// prime base, 0 off prime powers), 8 (double) or 16 (complex double, re then im).
// kind is the FuncKind ordinal.

#include "nilcorr/equidist.hpp"
#include "nilcorr/multfunc.hpp"
#include "nilcorr/testfn.hpp"

#include "json.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace nilcorr {

inline constexpr const char* kToolVersion = "0.1.0";

void write_ncf1(const std::string& path, const MultFuncTable& t, const std::string& provenance);
MultFuncTable read_ncf1(const std::string& path, std::string* provenance = nullptr);

// Writes to a sibling temporary file and renames it over `path`.
void atomic_write(const std::string& path, const std::string& bytes);

std::string sha256_hex(const std::string& bytes);

// "1e8", "100000000", "1_000_000": exact non-negative integers only.
std::int64_t parse_count(const std::string& text);

MultFuncTable truncate_table(const MultFuncTable& t, std::int64_t N);
std::string table_to_csv(const MultFuncTable& t, const std::string& header);  // n,re,im

// Tables keyed by (kind, N) in a directory.  A cached table with a larger N
// is truncated on load.
class TableCache {
 public:
  explicit TableCache(std::string dir, std::ostream* log = nullptr);
  // NILCORR_CACHE_DIR, else ./.nilcorr_cache
  static std::string default_dir();

  // name: mobius, liouville, mangoldt, tau
  MultFuncTable get(const std::string& name, std::int64_t N, int threads = 0);
  const std::string& dir() const { return dir_; }

 private:
  std::string dir_;
  std::ostream* log_;
};

MultFuncTable build_table(const std::string& name, std::int64_t N, int threads = 0);

// JSON forms of the configuration objects.
//   manifold: {"kind": "torus", "dim": 1, "degree": 1} | {"kind": "heisenberg"} |
//             {"kind": "generic", "dim", "degree", "filtration_dims", "height",
//              "structure_constants": [[i, j, k, "value"], ...]} (1-based)
//   sequence: [g_0, g_1, ...], each a coordinate list of numbers or rational strings
//   test function: {"type": "constant", "re", "im"} | {"type": "character", "k": [...]} |
//             {"type": "vertical_character", "dim", "k"} | {"type": "coord", "j"} |
//             {"type": "frac", "child"} | {"type": "bump", "j"} |
//             {"type": "product", "factors": [...]} | {"type": "sum", "terms": [...]}
ManifoldPtr manifold_from_json(const nlohmann::json& j, const std::string& path = "manifold");
PolySequence sequence_from_json(ManifoldPtr g, const nlohmann::json& j, const std::string& path = "sequence");
TestFunction test_function_from_json(const nlohmann::json& j, const std::string& path = "test_function");
nlohmann::json test_function_to_json(const TestFunction& f);

struct ExperimentConfig {
  std::string command;  // sieve, correlate, scan, equidist, conditions, vaughan, ingest
  std::string function = "mobius";  // mobius, liouville, mangoldt, tau, mobius_tau, imported
  std::string lfunc_file;
  nlohmann::json manifold = nlohmann::json::object();
  nlohmann::json sequence = nlohmann::json::array();
  nlohmann::json test_function = nlohmann::json::object();
  nlohmann::json family = nlohmann::json::array();
  std::vector<std::int64_t> N_list;
  std::int64_t W = 1, b = 1;
  double C = 2.0;
  double delta = 0.1;
  std::string gap_mode = "raw";
  bool total = false;
  std::int64_t chunk_size = std::int64_t(1) << 16;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string output_path;
  std::string format = "csv";  // csv, json, binary
};

// Unknown keys and type errors throw Error(Config) naming the field path.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);
// .toml files are read as TOML, anything else as JSON.
ExperimentConfig load_config(const std::string& path);

// "# nilcorr <version>\n# config_sha256 <hex>\n# seed <seed>\n"
std::string provenance_header(const ExperimentConfig& c);

std::string to_json(const ConditionReport& r);

// Runs one command.  Results go to c.output_path (atomically) or to `out`;
// diagnostics go to `log`.  Returns 0 on success, 1 on validation errors
// and 2 on capacity errors.
int run(const ExperimentConfig& c, std::ostream& out, std::ostream& log, TableCache* cache = nullptr);

}  // namespace nilcorr
