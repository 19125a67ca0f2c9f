#include "nilcorr/io.hpp"
#include "nilcorr/errors.hpp"

#include "CLI11.hpp"

#include <iostream>

using namespace nilcorr;

namespace {

struct Common {
  std::string out, format;
};

void add_common(CLI::App* sub, Common& c, bool with_format = true) {
  sub->add_option("--out", c.out, "output file (default: stdout)");
  if (with_format) sub->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json", "binary"}));
}

void apply_common(ExperimentConfig& cfg, const Common& c) {
  if (!c.out.empty()) cfg.output_path = c.out;
  if (!c.format.empty()) cfg.format = c.format;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nilcorr: correlations of multiplicative functions with nilsequences"};
  app.set_version_flag("--version", std::string("nilcorr ") + kToolVersion);
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (0 = all)")->check(CLI::NonNegativeNumber);

  Common common;
  std::string kind, n_text, config_path, file, w_text = "1", b_text = "1";
  double C = 2.0;
  std::uint64_t seed = 0;

  auto* sieve = app.add_subcommand("sieve", "tabulate mobius, liouville, mangoldt or tau");
  sieve->add_option("--kind", kind, "table kind")
      ->required()
      ->check(CLI::IsMember({"mobius", "liouville", "mangoldt", "tau"}));
  sieve->add_option("--n", n_text, "table length, e.g. 1e8")->required();
  sieve->add_option("--out", common.out, "output file")->required();
  sieve->add_option("--format", common.format, "binary (NCF1) or csv")->check(CLI::IsMember({"binary", "csv"}));

  auto* correlate = app.add_subcommand("correlate", "one centered correlation sum");
  auto* scan = app.add_subcommand("scan", "decay scan over N_list");
  auto* equidist = app.add_subcommand("equidist", "empirical equidistribution report");
  for (auto* s : {correlate, scan, equidist}) {
    s->add_option("--config", config_path, "TOML or JSON experiment config")->required()->check(CLI::ExistingFile);
    add_common(s, common);
  }

  auto* conditions = app.add_subcommand("conditions", "class M' statistics for a table");
  conditions->add_option("--kind", kind, "function")
      ->required()
      ->check(CLI::IsMember({"mobius", "liouville", "mangoldt", "tau", "mobius_tau"}));
  conditions->add_option("--n", n_text, "N")->required();
  conditions->add_option("--w", w_text, "W");
  conditions->add_option("--b", b_text, "b");
  conditions->add_option("--c", C, "exponent C");
  conditions->add_option("--seed", seed, "seed for the multiplicativity sample");
  add_common(conditions, common);

  auto* vaughan = app.add_subcommand("vaughan", "Vaughan identity check");
  vaughan->add_option("--n", n_text, "N (>= 27)")->required();
  add_common(vaughan, common);

  auto* ingest = app.add_subcommand("ingest", "validate an L-function coefficient file");
  ingest->add_option("--file", file, "JSON coefficient file")->required()->check(CLI::ExistingFile);
  add_common(ingest, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  ExperimentConfig cfg;
  try {
    if (*correlate || *scan || *equidist) cfg = load_config(config_path);
    if (*sieve) {
      cfg.command = "sieve";
      cfg.function = kind;
      cfg.format = "binary";
      cfg.N_list = {parse_count(n_text)};
    } else if (*correlate) {
      cfg.command = "correlate";
    } else if (*scan) {
      cfg.command = "scan";
    } else if (*equidist) {
      cfg.command = "equidist";
    } else if (*conditions) {
      cfg.command = "conditions";
      cfg.function = kind;
      cfg.N_list = {parse_count(n_text)};
      cfg.W = parse_count(w_text);
      cfg.b = parse_count(b_text);
      cfg.C = C;
      cfg.seed = seed;
    } else if (*vaughan) {
      cfg.command = "vaughan";
      cfg.N_list = {parse_count(n_text)};
    } else if (*ingest) {
      cfg.command = "ingest";
      cfg.lfunc_file = file;
    }
    apply_common(cfg, common);
    if (threads > 0) cfg.threads = threads;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  TableCache cache(TableCache::default_dir(), &std::cerr);
  return run(cfg, std::cout, std::cerr, &cache);
}
