// samples/decode_sample.cc

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

// Decodes the yes/no sample with both search modes, then builds, prunes and
// prints the lattice of the label-synchronous run.
//
//   decode_sample [data_dir]

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "lsdwfst/lsdwfst.hpp"

namespace {

std::ifstream Open(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

std::string Words(const lsdwfst::DecodeResult& r, const lsdwfst::SymbolTable& osyms) {
  std::string out;
  for (lsdwfst::Label l : r.olabels) out += osyms.symbol(l) + " ";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace lsdwfst;
  const std::string dir = argc > 1 ? argv[1] : LSDWFST_SAMPLE_DATA;
  try {
    auto is = Open(dir + "/yesno.isyms");
    auto os = Open(dir + "/yesno.osyms");
    SymbolTable isyms = SymbolTable::Read(is), osyms = SymbolTable::Read(os);
    auto g = Open(dir + "/yesno.fst.txt");
    Wfst graph = parse_wfst_text(g, &isyms, &osyms);
    auto p = Open(dir + "/yesno.post");
    PosteriorMatrix posts = load_posteriors(p);

    DecodeConfig cfg;
    cfg.beam = 10.0;
    const BlankMask blank = classify_blank_frames(posts, cfg.blank_threshold);
    std::printf("frames=%zu blank=%zu threshold=%.2f\n", posts.num_frames(), blank.count(),
                cfg.blank_threshold);

    DecodeResult fsd = decode_fsd(graph, posts, cfg);
    std::printf("fsd: %s cost=%.4f steps=%zu tokens=%zu\n", Words(fsd, osyms).c_str(),
                fsd.total_cost.value(), fsd.search_steps, fsd.tokens_expanded);

    LatticeBuilder sink(graph);
    DecodeResult lsd = SerialDecoder(graph, cfg).decode(posts, &sink);
    std::printf("lsd: %s cost=%.4f steps=%zu tokens=%zu\n", Words(lsd, osyms).c_str(),
                lsd.total_cost.value(), lsd.search_steps, lsd.tokens_expanded);

    DecodeResult par = parallel_decode(graph, posts, cfg, 4, 8);
    std::printf("parallel lsd identical: %s\n", par == lsd ? "yes" : "no");

    Lattice lattice = prune_lattice(sink.finish(), 4.0);
    LatticePath best = lattice_best_path(lattice);
    std::printf("lattice: nodes=%d arcs=%zu best=%.4f\n", lattice.num_nodes(), lattice.num_arcs(), best.cost);
    write_lattice_text(std::cout, lattice);
    return par == lsd ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
