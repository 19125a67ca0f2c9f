#include "nilcorr/io.hpp"

#include "nilcorr/correlate.hpp"
#include "nilcorr/errors.hpp"

#include <openssl/evp.h>
#include <unistd.h>

#define TOML_EXCEPTIONS 1
#include "toml.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

namespace nilcorr {

static_assert(std::endian::native == std::endian::little, "NCF1 I/O assumes a little-endian host");

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void config_error(const std::string& path, const std::string& msg) {
  throw Error(ErrorKind::Config, path + ": " + msg);
}

template <class T>
void put(std::string& s, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  s.append(buf, sizeof(T));
}

template <class T>
T get(std::istream& in, const std::string& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw Error(ErrorKind::Io, "truncated NCF1 file " + path);
  return v;
}

bool analytic_kind(FuncKind k) {
  return k == FuncKind::lambda_pi_gl2 || k == FuncKind::lambda_pi_imported || k == FuncKind::mobius_times_lambda;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void atomic_write(const std::string& path, const std::string& bytes) {
  const fs::path target(path);
  if (target.has_parent_path() && !fs::exists(target.parent_path()))
    throw Error(ErrorKind::Io, "directory does not exist: " + target.parent_path().string());
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(ErrorKind::Io, "write failed for " + tmp);
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::Io, "cannot rename onto " + path);
  }
}

void write_ncf1(const std::string& path, const MultFuncTable& t, const std::string& provenance) {
  std::uint32_t elem = 8;
  if (!t.small.empty()) elem = 1;
  else if (!t.base.empty()) elem = 4;
  else if (!t.cplx.empty()) elem = 16;
  const auto N = static_cast<std::uint64_t>(t.N);
  std::string s;
  s.reserve(24 + provenance.size() + N * elem);
  s.append("NCF1");
  put<std::uint64_t>(s, N);
  put<std::uint32_t>(s, static_cast<std::uint32_t>(t.kind));
  put<std::uint32_t>(s, elem);
  put<std::uint32_t>(s, static_cast<std::uint32_t>(provenance.size()));
  s.append(provenance);
  auto raw = [&](const void* p, std::size_t bytes) { s.append(static_cast<const char*>(p), bytes); };
  if (N > 0) {
    switch (elem) {
      case 1: raw(t.small.data() + 1, N); break;
      case 4: raw(t.base.data() + 1, N * 4); break;
      case 16: raw(t.cplx.data() + 1, N * 16); break;
      default: raw(t.real.data() + 1, N * 8); break;
    }
  }
  atomic_write(path, s);
}

MultFuncTable read_ncf1(const std::string& path, std::string* provenance) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "NCF1", 4) != 0) throw Error(ErrorKind::Io, "not an NCF1 file: " + path);
  const auto N = get<std::uint64_t>(in, path);
  const auto kind = get<std::uint32_t>(in, path);
  const auto elem = get<std::uint32_t>(in, path);
  const auto plen = get<std::uint32_t>(in, path);
  if (kind > static_cast<std::uint32_t>(FuncKind::custom)) throw Error(ErrorKind::Io, "unknown kind in " + path);
  if (N > (std::uint64_t(1) << 40)) throw Error(ErrorKind::Io, "implausible N in " + path);
  std::string prov(plen, '\0');
  if (plen && !in.read(prov.data(), plen)) throw Error(ErrorKind::Io, "truncated NCF1 file " + path);
  if (provenance) *provenance = prov;

  MultFuncTable t;
  t.kind = static_cast<FuncKind>(kind);
  t.normalization = analytic_kind(t.kind) ? Normalization::analytic : Normalization::arithmetic;
  t.N = static_cast<std::int64_t>(N);
  auto body = [&](void* p, std::size_t bytes) {
    if (bytes && !in.read(static_cast<char*>(p), static_cast<std::streamsize>(bytes)))
      throw Error(ErrorKind::Io, "truncated NCF1 file " + path);
  };
  switch (elem) {
    case 1:
      t.small.assign(N + 1, 0);
      body(t.small.data() + 1, N);
      break;
    case 4:
      t.base.assign(N + 1, 0);
      body(t.base.data() + 1, N * 4);
      break;
    case 8:
      t.real.assign(N + 1, 0.0);
      body(t.real.data() + 1, N * 8);
      break;
    case 16:
      t.cplx.assign(N + 1, Complex(0.0));
      body(t.cplx.data() + 1, N * 16);
      break;
    default: throw Error(ErrorKind::Io, "bad element size in " + path);
  }
  return t;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorKind::Io, "sha256 failed");
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (unsigned i = 0; i < len; ++i) os << std::setw(2) << static_cast<int>(md[i]);
  return os.str();
}

std::int64_t parse_count(const std::string& text) {
  std::string s;
  for (char ch : text)
    if (ch != '_') s.push_back(ch);
  const auto bad = [&] { return Error(ErrorKind::Config, "not a non-negative integer: '" + text + "'"); };
  if (s.empty()) throw bad();
  std::string mant = s;
  long exp = 0;
  if (const auto e = s.find_first_of("eE"); e != std::string::npos) {
    mant = s.substr(0, e);
    const std::string es = s.substr(e + 1);
    if (es.empty() || es.size() > 3) throw bad();
    std::size_t used = 0;
    try {
      exp = std::stol(es, &used);
    } catch (...) {
      throw bad();
    }
    if (used != es.size()) throw bad();
  }
  std::string digits;
  long frac_digits = 0;
  bool dot = false;
  for (char ch : mant) {
    if (ch == '.' && !dot) {
      dot = true;
    } else if (ch >= '0' && ch <= '9') {
      digits.push_back(ch);
      if (dot) ++frac_digits;
    } else {
      throw bad();
    }
  }
  if (digits.empty()) throw bad();
  long shift = exp - frac_digits;
  while (shift < 0 && !digits.empty() && digits.back() == '0') {
    digits.pop_back();
    ++shift;
  }
  if (shift < 0) throw bad();
  __int128 v = 0;
  const __int128 lim = std::numeric_limits<std::int64_t>::max();
  for (char ch : digits) {
    v = v * 10 + (ch - '0');
    if (v > lim) throw bad();
  }
  for (long i = 0; i < shift; ++i) {
    v *= 10;
    if (v > lim) throw bad();
  }
  return static_cast<std::int64_t>(v);
}

MultFuncTable truncate_table(const MultFuncTable& t, std::int64_t N) {
  if (N > t.N) throw Error(ErrorKind::TableTooShort, "cannot extend a table by truncation", {t.N, N});
  MultFuncTable r = t;
  r.N = N;
  const auto n = static_cast<std::size_t>(N + 1);
  if (!r.small.empty()) r.small.resize(n);
  if (!r.base.empty()) r.base.resize(n);
  if (!r.real.empty()) r.real.resize(n);
  if (!r.cplx.empty()) r.cplx.resize(n);
  return r;
}

std::string table_to_csv(const MultFuncTable& t, const std::string& header) {
  std::ostringstream os;
  os.precision(17);
  os << header << "n,re,im\n";
  for (std::int64_t n = 1; n <= t.N; ++n) {
    const Complex v = t(n);
    os << n << ',' << v.real() << ',' << v.imag() << '\n';
  }
  return os.str();
}

MultFuncTable build_table(const std::string& name, std::int64_t N, int threads) {
  SieveOptions so;
  so.threads = threads;
  if (name == "mobius") return sieve_mobius(N, so);
  if (name == "liouville") return sieve_liouville(N, so);
  if (name == "mangoldt") return sieve_von_mangoldt(N, so);
  if (name == "tau") {
    TauOptions to;
    to.threads = threads;
    to.exact_cap = 0;
    return normalize_gl2(tau_table(N, to));
  }
  throw Error(ErrorKind::Config, "unknown table kind '" + name + "'");
}

TableCache::TableCache(std::string dir, std::ostream* log) : dir_(std::move(dir)), log_(log) {}

std::string TableCache::default_dir() {
  if (const char* d = std::getenv("NILCORR_CACHE_DIR"); d && *d) return d;
  return ".nilcorr_cache";
}

MultFuncTable TableCache::get(const std::string& name, std::int64_t N, int threads) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  const std::string prefix = name + "_";
  std::int64_t best = -1;
  fs::path best_path;
  if (!ec)
    for (const auto& e : fs::directory_iterator(dir_, ec)) {
      const std::string f = e.path().filename().string();
      if (f.rfind(prefix, 0) != 0 || e.path().extension() != ".ncf1") continue;
      const std::string mid = f.substr(prefix.size(), f.size() - prefix.size() - 5);
      if (mid.empty() || !std::all_of(mid.begin(), mid.end(), [](char c) { return c >= '0' && c <= '9'; })) continue;
      std::int64_t m = 0;
      try {
        m = parse_count(mid);
      } catch (const Error&) {
        continue;
      }
      if (m >= N && (best < 0 || m < best)) {
        best = m;
        best_path = e.path();
      }
    }
  if (best >= 0) {
    try {
      auto t = read_ncf1(best_path.string());
      if (log_) *log_ << "cache hit: " << best_path.string() << " for " << name << " N=" << N << '\n';
      return best == N ? t : truncate_table(t, N);
    } catch (const Error& e) {
      if (log_) *log_ << "cache entry unreadable, rebuilding: " << e.what() << '\n';
    }
  }
  auto t = build_table(name, N, threads);
  const std::string path = (fs::path(dir_) / (prefix + std::to_string(N) + ".ncf1")).string();
  try {
    write_ncf1(path, t, std::string("nilcorr ") + kToolVersion + " cache " + name);
    if (log_) *log_ << "cache store: " << path << '\n';
  } catch (const Error& e) {
    if (log_) *log_ << "cache store failed: " << e.what() << '\n';
  }
  return t;
}

// ---------------------------------------------------------------- JSON forms

namespace {

std::int64_t count_field(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) {
    if (j.get<std::uint64_t>() > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
      config_error(path, "out of range");
    return static_cast<std::int64_t>(j.get<std::uint64_t>());
  }
  if (j.is_number_integer()) {
    if (j.get<std::int64_t>() < 0) config_error(path, "must be non-negative");
    return j.get<std::int64_t>();
  }
  if (j.is_number_float()) {
    const double d = j.get<double>();
    if (!(d >= 0) || d != std::floor(d) || d > 9.0e15) config_error(path, "must be a non-negative integer");
    return static_cast<std::int64_t>(d);
  }
  if (j.is_string()) {
    try {
      return parse_count(j.get<std::string>());
    } catch (const Error& e) {
      config_error(path, e.what());
    }
  }
  config_error(path, "expected an integer");
}

std::int64_t int_field(const json& j, const std::string& path) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float() && j.get<double>() == std::floor(j.get<double>())) return static_cast<std::int64_t>(j.get<double>());
  if (j.is_string()) return count_field(j, path);
  config_error(path, "expected an integer");
}

double real_field(const json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    try {
      return to_double(parse_rational(j.get<std::string>()));
    } catch (...) {
      config_error(path, "expected a number");
    }
  }
  config_error(path, "expected a number");
}

std::string string_field(const json& j, const std::string& path) {
  if (!j.is_string()) config_error(path, "expected a string");
  return j.get<std::string>();
}

const json& require(const json& j, const char* key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) config_error(path + "." + key, "missing");
  return j.at(key);
}

void only_keys(const json& j, std::initializer_list<const char*> keys, const std::string& path) {
  if (!j.is_object()) config_error(path, "expected an object");
  for (const auto& [k, v] : j.items())
    if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
      config_error(path + "." + k, "unknown key");
}

}  // namespace

ManifoldPtr manifold_from_json(const json& j, const std::string& path) {
  const std::string kind = string_field(require(j, "kind", path), path + ".kind");
  if (kind == "heisenberg") {
    only_keys(j, {"kind"}, path);
    return build_nilmanifold(heisenberg_spec());
  }
  if (kind == "torus") {
    only_keys(j, {"kind", "dim", "degree"}, path);
    const int dim = j.contains("dim") ? static_cast<int>(count_field(j["dim"], path + ".dim")) : 1;
    const int deg = j.contains("degree") ? static_cast<int>(count_field(j["degree"], path + ".degree")) : 1;
    if (dim < 1 || deg < 1) config_error(path, "dim and degree must be positive");
    return build_nilmanifold(torus_spec(dim, deg));
  }
  if (kind == "generic") {
    only_keys(j, {"kind", "dim", "degree", "filtration_dims", "height", "structure_constants"}, path);
    NilmanifoldSpec s;
    s.family = Family::generic;
    s.dim = static_cast<int>(count_field(require(j, "dim", path), path + ".dim"));
    s.degree = static_cast<int>(count_field(require(j, "degree", path), path + ".degree"));
    const auto& fd = require(j, "filtration_dims", path);
    if (!fd.is_array()) config_error(path + ".filtration_dims", "expected an array");
    for (std::size_t i = 0; i < fd.size(); ++i)
      s.filtration_dims.push_back(static_cast<int>(count_field(fd[i], path + ".filtration_dims[" + std::to_string(i) + "]")));
    if (j.contains("height")) s.rationality_height = count_field(j["height"], path + ".height");
    if (j.contains("structure_constants")) {
      const auto& sc = j["structure_constants"];
      if (!sc.is_array()) config_error(path + ".structure_constants", "expected an array");
      for (std::size_t i = 0; i < sc.size(); ++i) {
        const std::string p = path + ".structure_constants[" + std::to_string(i) + "]";
        if (!sc[i].is_array() || sc[i].size() != 4) config_error(p, "expected [i, j, k, value]");
        StructureConstant c;
        c.i = static_cast<int>(int_field(sc[i][0], p)) - 1;
        c.j = static_cast<int>(int_field(sc[i][1], p)) - 1;
        c.k = static_cast<int>(int_field(sc[i][2], p)) - 1;
        c.value = sc[i][3].is_string() ? parse_rational(sc[i][3].get<std::string>())
                                       : Rational(int_field(sc[i][3], p));
        s.structure_constants.push_back(c);
      }
    }
    return build_nilmanifold(std::move(s));
  }
  config_error(path + ".kind", "expected torus, heisenberg or generic");
}

PolySequence sequence_from_json(ManifoldPtr g, const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) config_error(path, "expected a non-empty array of coefficients");
  bool exact = false;
  for (const auto& c : j) {
    if (!c.is_array()) config_error(path, "each coefficient must be an array of coordinates");
    for (const auto& x : c) exact = exact || x.is_string();
  }
  std::vector<GroupElement> coeffs;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    if (static_cast<int>(j[i].size()) != g->dim()) config_error(p, "expected " + std::to_string(g->dim()) + " coordinates");
    if (exact) {
      std::vector<Rational> v;
      for (std::size_t t = 0; t < j[i].size(); ++t) {
        const auto& x = j[i][t];
        const std::string q = p + "[" + std::to_string(t) + "]";
        if (x.is_string()) {
          try {
            v.push_back(parse_rational(x.get<std::string>()));
          } catch (...) {
            config_error(q, "not a rational");
          }
        } else if (x.is_number()) {
          v.push_back(exact_rational(x.get<double>()));
        } else {
          config_error(q, "expected a number");
        }
      }
      coeffs.emplace_back(std::move(v));
    } else {
      std::vector<double> v;
      for (std::size_t t = 0; t < j[i].size(); ++t) v.push_back(real_field(j[i][t], p + "[" + std::to_string(t) + "]"));
      coeffs.emplace_back(std::move(v));
    }
  }
  return make_poly_sequence(std::move(g), std::move(coeffs));
}

TestFunction test_function_from_json(const json& j, const std::string& path) {
  const std::string type = string_field(require(j, "type", path), path + ".type");
  auto list = [&](const char* key) {
    const auto& a = require(j, key, path);
    if (!a.is_array() || a.empty()) config_error(path + "." + key, "expected a non-empty array");
    std::vector<TestFunction> out;
    for (std::size_t i = 0; i < a.size(); ++i)
      out.push_back(test_function_from_json(a[i], path + "." + key + "[" + std::to_string(i) + "]"));
    return out;
  };
  TestFunction f = TestFunction::constant(0.0);
  if (type == "constant") {
    only_keys(j, {"type", "re", "im", "declared_lip"}, path);
    f = TestFunction::constant(Complex(j.contains("re") ? real_field(j["re"], path + ".re") : 0.0,
                                       j.contains("im") ? real_field(j["im"], path + ".im") : 0.0));
  } else if (type == "character") {
    only_keys(j, {"type", "k", "declared_lip"}, path);
    const auto& k = require(j, "k", path);
    if (!k.is_array()) config_error(path + ".k", "expected an array");
    std::vector<std::int64_t> v;
    for (std::size_t i = 0; i < k.size(); ++i) v.push_back(int_field(k[i], path + ".k[" + std::to_string(i) + "]"));
    f = TestFunction::character(std::move(v));
  } else if (type == "vertical_character") {
    only_keys(j, {"type", "dim", "k", "declared_lip"}, path);
    f = TestFunction::vertical_character(static_cast<int>(count_field(require(j, "dim", path), path + ".dim")),
                                         int_field(require(j, "k", path), path + ".k"));
  } else if (type == "coord") {
    only_keys(j, {"type", "j", "declared_lip"}, path);
    f = TestFunction::coord(static_cast<int>(count_field(require(j, "j", path), path + ".j")));
  } else if (type == "bump") {
    only_keys(j, {"type", "j", "declared_lip"}, path);
    f = TestFunction::bump(static_cast<int>(count_field(require(j, "j", path), path + ".j")));
  } else if (type == "frac") {
    only_keys(j, {"type", "child", "declared_lip"}, path);
    f = TestFunction::frac(test_function_from_json(require(j, "child", path), path + ".child"));
  } else if (type == "product") {
    only_keys(j, {"type", "factors", "declared_lip"}, path);
    f = TestFunction::product(list("factors"));
  } else if (type == "sum") {
    only_keys(j, {"type", "terms", "declared_lip"}, path);
    f = TestFunction::sum(list("terms"));
  } else {
    config_error(path + ".type", "unknown test function type '" + type + "'");
  }
  if (j.contains("declared_lip")) f.declared_lip = real_field(j["declared_lip"], path + ".declared_lip");
  return f;
}

json test_function_to_json(const TestFunction& f) {
  json j;
  auto kids = [&] {
    json a = json::array();
    for (const auto& c : f.children()) a.push_back(test_function_to_json(c));
    return a;
  };
  switch (f.kind()) {
    case TestFunction::Kind::constant:
      j = {{"type", "constant"}, {"re", f.scalar().real()}, {"im", f.scalar().imag()}};
      break;
    case TestFunction::Kind::character: j = {{"type", "character"}, {"k", f.k()}}; break;
    case TestFunction::Kind::coord: j = {{"type", "coord"}, {"j", f.index()}}; break;
    case TestFunction::Kind::bump: j = {{"type", "bump"}, {"j", f.index()}}; break;
    case TestFunction::Kind::frac: j = {{"type", "frac"}, {"child", test_function_to_json(f.children().at(0))}}; break;
    case TestFunction::Kind::product: j = {{"type", "product"}, {"factors", kids()}}; break;
    case TestFunction::Kind::sum: j = {{"type", "sum"}, {"terms", kids()}}; break;
  }
  if (f.declared_lip >= 0) j["declared_lip"] = f.declared_lip;
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) config_error("<root>", "expected an object");
  ExperimentConfig c;
  for (const auto& [k, v] : j.items()) {
    if (k == "command") c.command = string_field(v, k);
    else if (k == "function") c.function = string_field(v, k);
    else if (k == "lfunc_file") c.lfunc_file = string_field(v, k);
    else if (k == "manifold") c.manifold = v;
    else if (k == "sequence") c.sequence = v;
    else if (k == "test_function") c.test_function = v;
    else if (k == "family") c.family = v;
    else if (k == "N") c.N_list = {count_field(v, k)};
    else if (k == "N_list") {
      if (!v.is_array()) config_error(k, "expected an array");
      c.N_list.clear();
      for (std::size_t i = 0; i < v.size(); ++i) c.N_list.push_back(count_field(v[i], k + "[" + std::to_string(i) + "]"));
    } else if (k == "W") c.W = count_field(v, k);
    else if (k == "b") c.b = count_field(v, k);
    else if (k == "C") c.C = real_field(v, k);
    else if (k == "delta") c.delta = real_field(v, k);
    else if (k == "gap_mode") c.gap_mode = string_field(v, k);
    else if (k == "total") {
      if (!v.is_boolean()) config_error(k, "expected a boolean");
      c.total = v.get<bool>();
    } else if (k == "chunk_size") c.chunk_size = count_field(v, k);
    else if (k == "seed") {
      if (v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0)) c.seed = v.get<std::uint64_t>();
      else c.seed = static_cast<std::uint64_t>(count_field(v, k));
    } else if (k == "threads") c.threads = static_cast<int>(count_field(v, k));
    else if (k == "output_path") c.output_path = string_field(v, k);
    else if (k == "format") c.format = string_field(v, k);
    else config_error(k, "unknown key");
  }
  if (c.format != "csv" && c.format != "json" && c.format != "binary") config_error("format", "expected csv, json or binary");
  if (c.gap_mode != "raw" && c.gap_mode != "lipschitz") config_error("gap_mode", "expected raw or lipschitz");
  if (c.chunk_size < 1) config_error("chunk_size", "must be positive");
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  return json{{"command", c.command},       {"function", c.function},
              {"lfunc_file", c.lfunc_file}, {"manifold", c.manifold},
              {"sequence", c.sequence},     {"test_function", c.test_function},
              {"family", c.family},         {"N_list", c.N_list},
              {"W", c.W},                   {"b", c.b},
              {"C", c.C},                   {"delta", c.delta},
              {"gap_mode", c.gap_mode},     {"total", c.total},
              {"chunk_size", c.chunk_size}, {"seed", c.seed},
              {"threads", c.threads},       {"output_path", c.output_path},
              {"format", c.format}};
}

ExperimentConfig load_config(const std::string& path) {
  const std::string text = read_file(path);
  json j;
  if (fs::path(path).extension() == ".toml") {
    try {
      const toml::table t = toml::parse(text, path);
      std::ostringstream os;
      os << toml::json_formatter{t};
      j = json::parse(os.str());
    } catch (const toml::parse_error& e) {
      throw Error(ErrorKind::Config, path + ": " + std::string(e.description()));
    }
  } else {
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::Config, path + ": " + e.what());
    }
  }
  return config_from_json(j);
}

// output_path and threads do not affect results and are left out of the hash.
std::string provenance_header(const ExperimentConfig& c) {
  json j = config_to_json(c);
  j.erase("output_path");
  j.erase("threads");
  std::ostringstream os;
  os << "# nilcorr " << kToolVersion << "\n# config_sha256 " << sha256_hex(j.dump()) << "\n# seed " << c.seed << '\n';
  return os.str();
}

std::string to_json(const ConditionReport& r) {
  json j{{"N", r.N},
         {"W", r.W},
         {"b", r.b},
         {"C", r.C},
         {"q_max", r.q_max},
         {"min_length", r.min_length},
         {"mean", {r.mean.real(), r.mean.imag()}},
         {"mean_paper", {r.mean_paper.real(), r.mean_paper.imag()}},
         {"w_equi_stat", r.w_equi_stat},
         {"witness", {{"a", r.witness_a}, {"q", r.witness_q}, {"length", r.witness_length}}},
         {"lp2_ratio", r.lp2_ratio},
         {"fl2_ratio", r.fl2_ratio}};
  json w = json::array();
  for (const auto& [bb, v] : r.wl2_ratios) w.push_back({{"b", bb}, {"ratio", v}});
  j["wl2_ratios"] = w;
  return j.dump(2);
}

// ---------------------------------------------------------------- runner

namespace {

std::int64_t single_N(const ExperimentConfig& c) {
  if (c.N_list.size() != 1) config_error("N", "this command takes exactly one N");
  if (c.N_list[0] < 1) config_error("N", "must be positive");
  return c.N_list[0];
}

MultFuncTable function_table(const ExperimentConfig& c, std::int64_t need, TableCache* cache) {
  auto base = [&](const std::string& name) {
    return cache ? cache->get(name, need, c.threads) : build_table(name, need, c.threads);
  };
  if (c.function == "mobius" || c.function == "liouville" || c.function == "mangoldt" || c.function == "tau")
    return base(c.function);
  if (c.function == "mobius_tau") return pointwise_product(base("mobius"), base("tau"), FuncKind::mobius_times_lambda);
  if (c.function == "imported") {
    if (c.lfunc_file.empty()) config_error("lfunc_file", "required for function = imported");
    auto t = import_lfunc_coeffs(c.lfunc_file).table;
    return t.N > need ? truncate_table(t, need) : t;
  }
  config_error("function", "unknown function '" + c.function + "'");
}

void emit(const ExperimentConfig& c, const std::string& body, std::ostream& out) {
  if (c.output_path.empty()) out << body;
  else atomic_write(c.output_path, body);
}

std::string wrap_json(const ExperimentConfig& c, json result) {
  const std::string h = provenance_header(c);
  const auto p = h.find("config_sha256 ") + 14;
  json j;
  j["provenance"] = {{"tool", std::string("nilcorr ") + kToolVersion},
                     {"config_sha256", h.substr(p, h.find('\n', p) - p)},
                     {"seed", c.seed}};
  j["result"] = std::move(result);
  return j.dump(2) + "\n";
}

std::vector<TestFunction> family_of(const ExperimentConfig& c) {
  std::vector<TestFunction> fam;
  if (c.family.is_array() && !c.family.empty()) {
    for (std::size_t i = 0; i < c.family.size(); ++i)
      fam.push_back(test_function_from_json(c.family[i], "family[" + std::to_string(i) + "]"));
  } else if (c.test_function.is_object() && !c.test_function.empty()) {
    fam.push_back(test_function_from_json(c.test_function));
  } else {
    config_error("family", "need family or test_function");
  }
  return fam;
}

int dispatch(const ExperimentConfig& c, std::ostream& out, std::ostream& log, TableCache* cache) {
  const std::string header = provenance_header(c);
  const std::string& cmd = c.command;

  if (cmd == "sieve") {
    const std::int64_t N = single_N(c);
    if (c.function != "mobius" && c.function != "liouville" && c.function != "mangoldt" && c.function != "tau")
      config_error("kind", "expected mobius, liouville, mangoldt or tau");
    const auto t = cache ? cache->get(c.function, N, c.threads) : build_table(c.function, N, c.threads);
    if (c.format == "binary") {
      if (c.output_path.empty()) config_error("output_path", "binary output needs a file");
      write_ncf1(c.output_path, t, header);
    } else if (c.format == "csv") {
      emit(c, table_to_csv(t, header), out);
    } else {
      config_error("format", "sieve writes binary or csv");
    }
    log << "sieve " << c.function << " N=" << N << " done\n";
    return 0;
  }

  if (cmd == "correlate" || cmd == "scan") {
    if (cmd == "correlate") single_N(c);
    if (c.N_list.empty()) config_error("N_list", "missing");
    if (c.W < 1) config_error("W", "must be positive");
    if (std::gcd(c.W, c.b) != 1) throw Error(ErrorKind::NonCoprime, "gcd(b, W) != 1", {c.b, c.W});
    auto g = sequence_from_json(manifold_from_json(c.manifold), c.sequence);
    auto F = test_function_from_json(c.test_function);
    const std::int64_t Nmax = *std::max_element(c.N_list.begin(), c.N_list.end());
    const auto f = function_table(c, c.W * Nmax + c.b, cache);
    CorrelationOptions opt;
    opt.chunk_size = c.chunk_size;
    opt.threads = c.threads;
    const auto reports = decay_scan(f, g, F, c.N_list, c.W, c.b, opt);
    if (c.format == "json") {
      json a = json::array();
      for (const auto& r : reports) a.push_back(json::parse(to_json(r)));
      emit(c, wrap_json(c, a), out);
    } else if (c.format == "csv") {
      emit(c, header + to_csv(reports), out);
    } else {
      config_error("format", "expected csv or json");
    }
    return 0;
  }

  if (cmd == "equidist") {
    const std::int64_t N = single_N(c);
    auto g = sequence_from_json(manifold_from_json(c.manifold), c.sequence);
    const auto fam = family_of(c);
    EquidistOptions opt;
    opt.mode = c.gap_mode == "lipschitz" ? GapMode::lipschitz : GapMode::raw;
    opt.threads = c.threads;
    const auto r = c.total ? total_discrepancy(g, N, fam, c.delta, opt) : empirical_discrepancy(g, N, fam, c.delta, opt);
    if (c.format == "json") emit(c, wrap_json(c, json::parse(to_json(r))), out);
    else if (c.format == "csv") emit(c, header + to_csv(r), out);
    else config_error("format", "expected csv or json");
    return 0;
  }

  if (cmd == "conditions") {
    const std::int64_t N = single_N(c);
    if (c.W < 1) config_error("W", "must be positive");
    if (std::gcd(c.W, c.b) != 1) throw Error(ErrorKind::NonCoprime, "gcd(b, W) != 1", {c.b, c.W});
    const auto f = function_table(c, std::max(N, c.W * N + c.W), cache);
    const auto r = check_conditions(f, c.W, c.b, c.C, N, c.threads);
    const double defect = multiplicativity_defect(f, 1000, c.seed);
    if (c.format == "json") {
      json j = json::parse(to_json(r));
      j["multiplicativity_defect"] = defect;
      emit(c, wrap_json(c, j), out);
    } else if (c.format == "csv") {
      std::ostringstream os;
      os.precision(17);
      os << header
         << "N,W,b,C,q_max,min_length,mean_re,mean_im,w_equi_stat,witness_a,witness_q,witness_length,lp2_ratio,"
            "fl2_ratio,multiplicativity_defect\n"
         << r.N << ',' << r.W << ',' << r.b << ',' << r.C << ',' << r.q_max << ',' << r.min_length << ','
         << r.mean.real() << ',' << r.mean.imag() << ',' << r.w_equi_stat << ',' << r.witness_a << ',' << r.witness_q
         << ',' << r.witness_length << ',' << r.lp2_ratio << ',' << r.fl2_ratio << ',' << defect << '\n';
      emit(c, os.str(), out);
    } else {
      config_error("format", "expected csv or json");
    }
    return 0;
  }

  if (cmd == "vaughan") {
    const std::int64_t N = single_N(c);
    const double err = vaughan_check(N);
    if (c.format == "json") {
      emit(c, wrap_json(c, {{"N", N}, {"max_error", err}}), out);
    } else {
      std::ostringstream os;
      os.precision(17);
      os << header << "N,max_error\n" << N << ',' << err << '\n';
      emit(c, os.str(), out);
    }
    return 0;
  }

  if (cmd == "ingest") {
    if (c.lfunc_file.empty()) config_error("file", "missing");
    const auto imp = import_lfunc_coeffs(c.lfunc_file);
    json j{{"label", imp.spec.conductor_label},
           {"rank", imp.spec.m_rank},
           {"primes", imp.spec.satake.size()},
           {"N", imp.table.N},
           {"satake_bound", "ok"}};
    if (c.format == "json") {
      emit(c, wrap_json(c, j), out);
    } else {
      std::ostringstream os;
      os << header << "label,rank,primes,N,satake_bound\n"
         << imp.spec.conductor_label << ',' << imp.spec.m_rank << ',' << imp.spec.satake.size() << ',' << imp.table.N
         << ",ok\n";
      emit(c, os.str(), out);
    }
    return 0;
  }

  config_error("command", "unknown command '" + cmd + "'");
}

}  // namespace

int run(const ExperimentConfig& c, std::ostream& out, std::ostream& log, TableCache* cache) {
  try {
    return dispatch(c, out, log, cache);
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::CapacityExceeded ? 2 : 1;
  } catch (const std::bad_alloc&) {
    log << "error: CapacityExceeded: out of memory\n";
    return 2;
  } catch (const json::exception& e) {
    log << "error: Config: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace nilcorr
