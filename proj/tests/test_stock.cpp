// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "retro/chem/smiles.hpp"
#include "retro/errors.hpp"
#include "retro/stock.hpp"

using namespace retro;

namespace {

struct TmpFile {
  explicit TmpFile(const std::string &name, const std::string &content)
      : path(name) {
    std::ofstream out(path);
    out << content;
  }
  ~TmpFile() { std::remove(path.c_str()); }
  std::string path;
};

}  // namespace

TEST_CASE("two spellings of one molecule collapse to a single entry") {
  TmpFile f("tmp_stock_a.smi", "CCO\nOCC\n");
  Stock stock = load_stock(f.path);
  CHECK(stock.size() == 1);
  CHECK(stock.source_path() == f.path);
}

TEST_CASE("empty file loads an empty stock") {
  TmpFile f("tmp_stock_b.smi", "");
  Stock stock = load_stock(f.path);
  CHECK(stock.size() == 0);
  CHECK_FALSE(stock.contains(parse_smiles("C")));
}

TEST_CASE("comments, ids, and blank lines are ignored") {
  TmpFile f("tmp_stock_c.smi",
            "# building blocks\n"
            "CCO\tethanol-1\n"
            "\n"
            "CC(=O)O\tacetic-acid # trailing note\n"
            "   \n"
            "CN # methylamine\n");
  Stock stock = load_stock(f.path);
  CHECK(stock.size() == 3);
  CHECK(stock.contains(parse_smiles("OCC")));
  CHECK(stock.contains(parse_smiles("OC(C)=O")));
  CHECK(stock.contains(parse_smiles("NC")));
}

TEST_CASE("strict mode reports the malformed line, lenient mode skips it") {
  TmpFile f("tmp_stock_d.smi", "CCO\nC((\nCN\n");
  CHECK_THROWS_AS(load_stock(f.path, true), ParseError);
  try {
    load_stock(f.path, true);
  } catch (const ParseError &e) {
    CHECK(e.position() == 2);
  }

  Stock lenient = load_stock(f.path, false);
  CHECK(lenient.size() == 2);
  CHECK(lenient.skipped_lines() == std::vector<std::size_t>{2});
  CHECK(lenient.contains(parse_smiles("CN")));
}

TEST_CASE("missing file raises IoError") {
  CHECK_THROWS_AS(load_stock("tmp_stock_never_written.smi"), IoError);
}

TEST_CASE("membership is invariant under SMILES spelling") {
  TmpFile f("tmp_stock_e.smi", "CC(=O)Nc1ccc(O)cc1\nClC(Cl)Cl\n");
  Stock stock = load_stock(f.path);
  // Several hand-rolled respellings of both entries.
  for (const char *s :
       {"Oc1ccc(NC(C)=O)cc1", "CC(=O)Nc1ccc(cc1)O", "C(Cl)(Cl)Cl",
        "ClC(Cl)Cl"}) {
    CAPTURE(s);
    CHECK(stock.contains(parse_smiles(s)));
  }
  CHECK_FALSE(stock.contains(parse_smiles("CC(=O)Nc1ccccc1")));
  CHECK(stock.contains_canonical(canonical_smiles("ClC(Cl)Cl")));
  CHECK_FALSE(stock.contains_canonical("ClC(Cl)Cl" + std::string(" ")));
}

TEST_CASE("add reports prior membership") {
  Stock stock;
  CHECK(stock.add("CCO"));
  CHECK_FALSE(stock.add("OCC"));
  CHECK(stock.size() == 1);
}
