// tools/lsd_wfst.cc

// Copyright 2026  lsdwfst authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: decode, lattice, bench and gen subcommands.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "lsdwfst/lsdwfst.hpp"

namespace {

using namespace lsdwfst;

constexpr int kExitUsage = 2;
constexpr int kExitSearchDied = 3;
constexpr int kExitInvariant = 4;

// Errors from reading inputs; reported with exit status 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string graph, isyms, osyms, posts, lattice_out;
  std::string mode = "lsd";
  std::string beam = "inf";
  std::string max_active = "inf";
  double blank_threshold = 0.98;
  double acoustic_scale = 1.0;
  std::size_t workers = 1;
  std::size_t group_size = 32;
  double lattice_beam = 8.0;
  std::string report = "text";
  std::uint64_t seed = 1;
  std::size_t repeats = 5;
};

void AddDecodeOptions(CLI::App* cmd, RunConfig& rc) {
  cmd->add_option("--graph", rc.graph, "WFST in text format")->required();
  cmd->add_option("--isyms", rc.isyms, "input symbol table (graph labels are symbols)");
  cmd->add_option("--osyms", rc.osyms, "output symbol table");
  cmd->add_option("--posts", rc.posts, "posterior matrix (text or POST1 binary)")->required();
  cmd->add_option("--mode", rc.mode, "fsd or lsd")->check(CLI::IsMember({"fsd", "lsd"}));
  cmd->add_option("--beam", rc.beam, "search beam (cost delta, or inf)");
  cmd->add_option("--max-active", rc.max_active, "max live tokens per step (or inf)");
  cmd->add_option("--blank-threshold", rc.blank_threshold, "blank posterior threshold");
  cmd->add_option("--acoustic-scale", rc.acoustic_scale, "acoustic scale");
  cmd->add_option("--workers", rc.workers, "worker threads (1 = serial decoder)")->check(CLI::PositiveNumber);
  cmd->add_option("--group-size", rc.group_size, "lanes per work group")->check(CLI::PositiveNumber);
  cmd->add_option("--lattice-out", rc.lattice_out, "write the pruned lattice here");
  cmd->add_option("--lattice-beam", rc.lattice_beam, "lattice pruning beam");
  cmd->add_option("--report", rc.report, "text or json")->check(CLI::IsMember({"text", "json"}));
  cmd->add_option("--seed", rc.seed, "seed (recorded in reports)");
}

double ParseCost(const std::string& s, const char* what) {
  double v;
  if (!detail::ParseDouble(s, &v) || v < 0.0) throw CLI::ValidationError(what, "expected a cost >= 0 or inf");
  return v;
}

DecodeConfig MakeDecodeConfig(const RunConfig& rc) {
  DecodeConfig cfg;
  cfg.beam = ParseCost(rc.beam, "--beam");
  if (rc.max_active != "inf") {
    double v = ParseCost(rc.max_active, "--max-active");
    if (v < 1.0) throw CLI::ValidationError("--max-active", "must be >= 1");
    cfg.max_active = static_cast<std::size_t>(v);
  }
  cfg.blank_threshold = rc.blank_threshold;
  cfg.acoustic_scale = rc.acoustic_scale;
  cfg.mode = rc.mode == "fsd" ? DecodeMode::kFsd : DecodeMode::kLsd;
  cfg.Check();
  return cfg;
}

std::ifstream OpenInput(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  return in;
}

struct Inputs {
  std::optional<SymbolTable> isyms, osyms;
  Wfst wfst;
  PosteriorMatrix posts;
};

Inputs LoadInputs(const RunConfig& rc) {
  Inputs in;
  try {
    if (!rc.isyms.empty()) {
      auto f = OpenInput(rc.isyms);
      in.isyms = SymbolTable::Read(f);
    }
    if (!rc.osyms.empty()) {
      auto f = OpenInput(rc.osyms);
      in.osyms = SymbolTable::Read(f);
    }
    {
      auto f = OpenInput(rc.graph);
      in.wfst = parse_wfst_text(f, in.isyms ? &*in.isyms : nullptr, in.osyms ? &*in.osyms : nullptr);
    }
    auto report = validate_epsilon_acyclic(in.wfst);
    if (!report.ok()) {
      std::ostringstream msg;
      msg << "epsilon cycle of weight " << report.total_weight << " through states";
      for (StateId s : report.cycle) msg << ' ' << s;
      throw InputError(msg.str());
    }
    auto f = OpenInput(rc.posts);
    in.posts = load_posteriors(f);
    CheckCompatible(in.wfst, in.posts);
  } catch (const InputError&) {
    throw;
  } catch (const std::exception& e) {
    throw InputError(e.what());
  }
  return in;
}

std::string Transcript(const DecodeResult& r, const std::optional<SymbolTable>& osyms) {
  std::ostringstream out;
  for (Label l : r.olabels) out << (osyms ? osyms->symbol(l) : std::to_string(l)) << ' ';
  char cost[64];
  std::snprintf(cost, sizeof(cost), "%.4f", r.total_cost.value());
  out << cost;
  return out.str();
}

DecodeResult RunDecode(const Inputs& in, const RunConfig& rc, LatticeSink* sink) {
  DecodeConfig cfg = MakeDecodeConfig(rc);
  if (rc.workers > 1)
    return ParallelDecoder(in.wfst, cfg, {rc.workers, rc.group_size, nullptr}).decode(in.posts, sink);
  return SerialDecoder(in.wfst, cfg).decode(in.posts, sink);
}

void ReportResult(const DecodeResult& r, const Inputs& in, const RunConfig& rc) {
  if (rc.report == "json") {
    nlohmann::json j = {{"schema", "v1"},
                        {"transcript", Transcript(r, in.osyms)},
                        {"olabels", r.olabels},
                        {"ilabels", r.ilabels},
                        {"total_cost", r.search_died ? nlohmann::json("inf") : nlohmann::json(r.total_cost.value())},
                        {"search_steps", r.search_steps},
                        {"tokens_expanded", r.tokens_expanded},
                        {"reached_final", r.reached_final},
                        {"search_died", r.search_died}};
    std::cout << j.dump() << '\n';
  } else if (!r.search_died) {
    std::cout << Transcript(r, in.osyms) << '\n';
  }
  if (r.search_died)
    std::cerr << "search died: no hypothesis survived (search_steps=" << r.search_steps
              << ", tokens_expanded=" << r.tokens_expanded << ")\n";
  else if (!r.reached_final)
    std::cerr << "WARNING: no final state reached; reporting best non-final hypothesis\n";
}

int CmdDecode(const RunConfig& rc, bool lattice_cmd) {
  Inputs in = LoadInputs(rc);
  std::optional<LatticeBuilder> builder;
  const bool want_lattice = lattice_cmd || !rc.lattice_out.empty();
  if (want_lattice) builder.emplace(in.wfst);
  DecodeResult r = RunDecode(in, rc, builder ? &*builder : nullptr);
  ReportResult(r, in, rc);
  if (want_lattice) {
    Lattice lat = prune_lattice(builder->finish(), rc.lattice_beam);
    if (!rc.lattice_out.empty()) {
      std::ofstream out(rc.lattice_out);
      if (!out) throw InputError("cannot write " + rc.lattice_out);
      write_lattice_text(out, lat);
    } else {
      write_lattice_text(std::cout, lat);
    }
    if (lattice_cmd && !lat.empty()) {
      LatticePath best = lattice_best_path(lat);
      std::cerr << "lattice: nodes=" << lat.num_nodes() << " arcs=" << lat.num_arcs()
                << " best_cost=" << best.cost << '\n';
    }
  }
  return r.search_died ? kExitSearchDied : 0;
}

int CmdBench(const RunConfig& rc) {
  Inputs in = LoadInputs(rc);
  BenchReport report = run_bench(in.wfst, in.posts, MakeDecodeConfig(rc), rc.workers, rc.group_size, rc.repeats);
  if (rc.report == "json") {
    auto j = to_json(report);
    j["config"]["seed"] = rc.seed;
    std::cout << j.dump(2) << '\n';
  } else {
    write_bench_text(std::cout, report);
  }
  return 0;
}

struct GenConfig {
  std::string kind = "random";
  FixtureParams params;
  std::string out_dir = ".";
  std::string prefix = "fixture";
};

int CmdGen(GenConfig gc) {
  if (gc.kind == "chain") gc.params.kind = FixtureKind::kChain;
  else if (gc.kind == "diamond") gc.params.kind = FixtureKind::kDiamond;
  else gc.params.kind = FixtureKind::kRandom;
  Fixture f;
  try {
    f = gen_fixture(gc.params);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  FixturePaths p = write_fixture(f, gc.out_dir, gc.prefix);
  std::cout << p.graph.string() << '\n'
            << p.isyms.string() << '\n'
            << p.osyms.string() << '\n'
            << p.posteriors.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Label-synchronous WFST Viterbi decoder"};
  app.require_subcommand(1);
  RunConfig rc;
  GenConfig gc;

  auto* decode = app.add_subcommand("decode", "decode posteriors and print the best transcript");
  AddDecodeOptions(decode, rc);
  auto* lattice = app.add_subcommand("lattice", "decode, prune and write the lattice");
  AddDecodeOptions(lattice, rc);
  auto* bench = app.add_subcommand("bench", "time FSD, LSD and parallel LSD search");
  AddDecodeOptions(bench, rc);
  bench->add_option("--repeats", rc.repeats, "timing repeats (median reported)")->check(CLI::PositiveNumber);

  auto* gen = app.add_subcommand("gen", "generate a synthetic graph and posteriors");
  gen->add_option("--kind", gc.kind, "chain, diamond or random")
      ->check(CLI::IsMember({"chain", "diamond", "random"}));
  gen->add_option("--states", gc.params.states, "number of states");
  gen->add_option("--arcs-per-state", gc.params.arcs_per_state, "random arcs per state");
  gen->add_option("--labels", gc.params.labels, "non-blank label count");
  gen->add_option("--frames", gc.params.frames, "frames T");
  gen->add_option("--blank-fraction", gc.params.blank_fraction, "fraction of blank frames");
  gen->add_option("--epsilon-fraction", gc.params.epsilon_fraction, "chance of a forward epsilon arc per state");
  gen->add_option("--seed", gc.params.seed, "generator seed");
  gen->add_option("--out-dir", gc.out_dir, "output directory");
  gen->add_option("--prefix", gc.prefix, "output file prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (*decode) return CmdDecode(rc, false);
    if (*lattice) return CmdDecode(rc, true);
    if (*bench) return CmdBench(rc);
    if (*gen) return CmdGen(gc);
  } catch (const InvariantError& e) {
    std::cerr << "invariant violated: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return 0;
}
