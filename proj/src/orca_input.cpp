/*
 * Copyright (c) 2026, The chemflow authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "chemflow/orca_input.hpp"

#include <algorithm>
#include <sstream>

#include "chemflow/error.hpp"
#include "chemflow/text.hpp"

namespace chemflow::orca {

namespace {

constexpr std::string_view kIndent = "  ";

bool is_dispersion(std::string_view t) {
  auto u = text::upper(t);
  return u == "D2" || u == "D3" || u == "D3BJ" || u == "D3ZERO" || u == "D4";
}

bool is_approximation(std::string_view t) {
  auto u = text::upper(t);
  return u == "RIJCOSX" || u == "RIJK" || u == "RI-JK" || u == "RIJONX" || u == "RI" || u == "RI-J" || u == "NORI";
}

bool is_grid(std::string_view t) {
  auto u = text::upper(t);
  return text::starts_with(u, "DEFGRID") || (text::starts_with(u, "GRID") && u.size() <= 6);
}

bool is_scf_convergence(std::string_view t) {
  auto u = text::upper(t);
  return u == "LOOSESCF" || u == "SLOPPYSCF" || u == "NORMALSCF" || u == "STRONGSCF" || u == "TIGHTSCF" ||
         u == "VERYTIGHTSCF" || u == "EXTREMESCF";
}

bool is_basis(std::string_view t) {
  auto l = text::lower(t);
  for (std::string_view p : {"def2-", "def2/", "ma-def2", "cc-p", "aug-cc", "6-31", "6-311", "sto-", "pcseg", "sarc"}) {
    if (text::starts_with(l, p)) return true;
  }
  return false;
}

std::string unquote(std::string_view s) {
  s = text::trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return std::string(s.substr(1, s.size() - 2));
  return std::string(s);
}

BlockEntry entry_from_line(std::string_view line) {
  auto t = text::trim(line);
  auto pos = t.find_first_of(" \t");
  if (pos == std::string_view::npos) return {std::string(t), {}};
  return {std::string(t.substr(0, pos)), std::string(text::trim(t.substr(pos)))};
}

bool parse_bool(std::string_view s) {
  if (text::iequals(s, "true")) return true;
  if (text::iequals(s, "false")) return false;
  throw Error(Errc::parse, "expected true/false, got '" + std::string(s) + "'");
}

int parse_positive(std::string_view s, const char* what) {
  auto v = text::parse_int(s);
  if (!v) throw Error(Errc::parse, std::string("bad ") + what + " '" + std::string(s) + "'");
  return static_cast<int>(*v);
}

void render_entries(std::ostringstream& os, const std::vector<BlockEntry>& entries) {
  for (const auto& e : entries) {
    os << kIndent << e.key;
    if (!e.value.empty()) os << ' ' << e.value;
    os << '\n';
  }
}

}  // namespace

const char* to_string(RunType r) noexcept {
  switch (r) {
    case RunType::OPT: return "OPT";
    case RunType::FREQ: return "FREQ";
    case RunType::SP: return "SP";
    case RunType::OPT_FREQ: return "OPT_FREQ";
  }
  return "?";
}

std::optional<RunType> parse_runtype(std::string_view s) {
  auto u = text::upper(s);
  if (u == "OPT") return RunType::OPT;
  if (u == "FREQ") return RunType::FREQ;
  if (u == "SP") return RunType::SP;
  if (u == "OPT_FREQ" || u == "OPT FREQ") return RunType::OPT_FREQ;
  return std::nullopt;
}

std::set<RunType> CalcSpec::canonical_runtypes() const {
  std::set<RunType> out;
  for (auto r : runtypes) {
    if (r == RunType::OPT_FREQ) {
      out.insert(RunType::OPT);
      out.insert(RunType::FREQ);
    } else {
      out.insert(r);
    }
  }
  return out;
}

bool CalcSpec::operator==(const CalcSpec& o) const {
  return canonical_runtypes() == o.canonical_runtypes() && functional == o.functional && basis == o.basis &&
         dispersion == o.dispersion && approximations == o.approximations && grid == o.grid &&
         extra_keywords == o.extra_keywords && scf_convergence == o.scf_convergence && maxcore == o.maxcore &&
         nprocs == o.nprocs && basis_block == o.basis_block && scf_block == o.scf_block &&
         geom_block == o.geom_block && cpcm_solvent == o.cpcm_solvent && tddft == o.tddft &&
         output_prints == o.output_prints && geometry == o.geometry;
}

std::vector<std::string> structural_errors(const CalcSpec& spec) {
  std::vector<std::string> errs;
  auto rt = spec.canonical_runtypes();
  if (rt.empty()) errs.push_back("no run type");
  if (rt.count(RunType::SP) && rt.count(RunType::OPT)) errs.push_back("SP cannot be combined with OPT");
  if (spec.functional.empty()) errs.push_back("functional is empty");
  if (spec.basis.empty()) errs.push_back("basis is empty");
  if (spec.maxcore < 1) errs.push_back("maxcore must be positive");
  if (spec.nprocs < 1) errs.push_back("nprocs must be positive");
  if (spec.geometry.multiplicity < 1) errs.push_back("multiplicity must be >= 1");
  if (spec.geometry.xyz_file.empty()) errs.push_back("geometry file is empty");
  if (spec.geometry.xyz_file.find_first_of(" \t\n") != std::string::npos) errs.push_back("geometry file contains whitespace");
  if (spec.tddft && spec.tddft->nroots < 1) errs.push_back("tddft nroots must be positive");
  auto check_token = [&](const std::string& t, const char* what) {
    if (t.empty() || t.find_first_of(" \t\n") != std::string::npos) errs.push_back(std::string("bad ") + what + " token '" + t + "'");
  };
  check_token(spec.functional.empty() ? "x" : spec.functional, "functional");
  check_token(spec.basis.empty() ? "x" : spec.basis, "basis");
  if (spec.dispersion) check_token(*spec.dispersion, "dispersion");
  if (spec.grid) check_token(*spec.grid, "grid");
  if (spec.scf_convergence) check_token(*spec.scf_convergence, "scf convergence");
  for (const auto& t : spec.approximations) check_token(t, "approximation");
  for (const auto& t : spec.extra_keywords) check_token(t, "keyword");
  auto check_entries = [&](const std::vector<BlockEntry>& entries, const char* block) {
    for (const auto& e : entries) {
      if (e.key.empty() || e.key.find_first_of(" \t\n") != std::string::npos || text::iequals(e.key, "end") ||
          e.value.find('\n') != std::string::npos) {
        errs.push_back(std::string("bad entry in %") + block + " block: '" + e.key + "'");
      }
    }
  };
  check_entries(spec.scf_block, "scf");
  if (spec.geom_block) check_entries(*spec.geom_block, "geom");
  for (const auto& p : spec.output_prints) {
    if (p.empty() || p.find('\n') != std::string::npos || text::iequals(text::trim(p), "end")) {
      errs.push_back("bad output directive '" + p + "'");
    }
  }
  return errs;
}

std::string render_input(const CalcSpec& spec) {
  auto errs = structural_errors(spec);
  if (!errs.empty()) throw Error(Errc::invalid_argument, "cannot render input: " + text::join(errs, "; "));

  std::ostringstream os;
  os << '!';
  auto rt = spec.canonical_runtypes();
  for (auto r : {RunType::OPT, RunType::FREQ, RunType::SP}) {
    if (rt.count(r)) os << ' ' << to_string(r);
  }
  os << ' ' << spec.functional << ' ' << spec.basis;
  if (spec.dispersion) os << ' ' << *spec.dispersion;
  for (const auto& a : spec.approximations) os << ' ' << a;
  if (spec.grid) os << ' ' << *spec.grid;
  for (const auto& k : spec.extra_keywords) os << ' ' << k;
  if (spec.scf_convergence) os << ' ' << *spec.scf_convergence;
  os << '\n';

  os << "%maxcore " << spec.maxcore << '\n';
  os << "%pal\n" << kIndent << "nprocs " << spec.nprocs << "\nend\n";
  if (spec.basis_block) {
    os << "%basis\n";
    if (!spec.basis_block->basis.empty()) os << kIndent << "Basis \"" << spec.basis_block->basis << "\"\n";
    if (!spec.basis_block->ecp.empty()) os << kIndent << "ECP \"" << spec.basis_block->ecp << "\"\n";
    os << "end\n";
  }
  os << "%scf\n";
  render_entries(os, spec.scf_block);
  os << "end\n";
  if (spec.geom_block) {
    os << "%geom\n";
    render_entries(os, *spec.geom_block);
    os << "end\n";
  }
  if (spec.cpcm_solvent) {
    os << "%cpcm\n" << kIndent << "smd true\n" << kIndent << "SMDsolvent \"" << *spec.cpcm_solvent << "\"\nend\n";
  }
  if (spec.tddft) {
    os << "%tddft\n"
       << kIndent << "NRoots " << spec.tddft->nroots << '\n'
       << kIndent << "Triplets " << (spec.tddft->triplets ? "true" : "false") << "\nend\n";
  }
  if (!spec.output_prints.empty()) {
    os << "%output\n";
    for (const auto& p : spec.output_prints) os << p << '\n';
    os << "end\n";
  }
  os << "* xyzfile " << spec.geometry.charge << ' ' << spec.geometry.multiplicity << ' ' << spec.geometry.xyz_file
     << '\n';
  return os.str();
}

CalcSpec parse_input(std::string_view input) {
  CalcSpec spec;
  auto rows = text::lines(input);
  bool have_keywords = false;
  bool have_geometry = false;

  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto line = text::trim(rows[i]);
    if (line.empty() || line.front() == '#') continue;

    if (line.front() == '!') {
      for (auto& tok : text::split_ws(line.substr(1))) {
        if (auto r = parse_runtype(tok)) {
          spec.runtypes.push_back(*r);
        } else if (is_scf_convergence(tok)) {
          spec.scf_convergence = tok;
        } else if (is_dispersion(tok) && !spec.dispersion) {
          spec.dispersion = tok;
        } else if (is_approximation(tok)) {
          spec.approximations.push_back(tok);
        } else if (is_grid(tok) && !spec.grid) {
          spec.grid = tok;
        } else if (spec.functional.empty() && !is_basis(tok)) {
          spec.functional = tok;
        } else if (spec.basis.empty() && is_basis(tok)) {
          spec.basis = tok;
        } else {
          spec.extra_keywords.push_back(tok);
        }
      }
      have_keywords = true;
      continue;
    }

    if (line.front() == '*') {
      auto f = text::split_ws(line.substr(1));
      if (f.size() != 4 || !text::iequals(f[0], "xyzfile")) {
        throw Error(Errc::parse, "unsupported geometry line '" + std::string(line) + "'");
      }
      spec.geometry.charge = parse_positive(f[1], "charge");
      spec.geometry.multiplicity = parse_positive(f[2], "multiplicity");
      spec.geometry.xyz_file = f[3];
      have_geometry = true;
      continue;
    }

    if (line.front() != '%') throw Error(Errc::parse, "unexpected line " + std::to_string(i + 1) + ": '" + std::string(line) + "'");

    auto head = text::split_ws(line.substr(1));
    if (head.empty()) throw Error(Errc::parse, "empty block header at line " + std::to_string(i + 1));
    auto name = text::lower(head[0]);
    if (name == "maxcore") {
      if (head.size() != 2) throw Error(Errc::parse, "%maxcore needs one value");
      spec.maxcore = parse_positive(head[1], "maxcore");
      continue;
    }

    std::vector<std::string> body;
    bool closed = false;
    for (++i; i < rows.size(); ++i) {
      auto b = text::trim(rows[i]);
      if (text::iequals(b, "end")) {
        closed = true;
        break;
      }
      if (!b.empty()) body.emplace_back(b);
    }
    if (!closed) throw Error(Errc::parse, "block %" + name + " is not closed");

    if (name == "pal") {
      for (const auto& b : body) {
        auto e = entry_from_line(b);
        if (!text::iequals(e.key, "nprocs")) throw Error(Errc::parse, "unknown %pal entry '" + e.key + "'");
        spec.nprocs = parse_positive(e.value, "nprocs");
      }
    } else if (name == "basis") {
      BasisBlock bb;
      for (const auto& b : body) {
        auto e = entry_from_line(b);
        if (text::iequals(e.key, "Basis")) bb.basis = unquote(e.value);
        else if (text::iequals(e.key, "ECP")) bb.ecp = unquote(e.value);
        else throw Error(Errc::parse, "unknown %basis entry '" + e.key + "'");
      }
      spec.basis_block = bb;
    } else if (name == "scf") {
      for (const auto& b : body) spec.scf_block.push_back(entry_from_line(b));
    } else if (name == "geom") {
      std::vector<BlockEntry> entries;
      for (const auto& b : body) entries.push_back(entry_from_line(b));
      spec.geom_block = entries;
    } else if (name == "cpcm") {
      for (const auto& b : body) {
        auto e = entry_from_line(b);
        if (text::iequals(e.key, "SMDsolvent")) spec.cpcm_solvent = unquote(e.value);
        else if (!text::iequals(e.key, "smd")) throw Error(Errc::parse, "unknown %cpcm entry '" + e.key + "'");
      }
      if (!spec.cpcm_solvent) throw Error(Errc::parse, "%cpcm block without SMDsolvent");
    } else if (name == "tddft") {
      TddftBlock td;
      for (const auto& b : body) {
        auto e = entry_from_line(b);
        if (text::iequals(e.key, "NRoots")) td.nroots = parse_positive(e.value, "NRoots");
        else if (text::iequals(e.key, "Triplets")) td.triplets = parse_bool(e.value);
        else throw Error(Errc::parse, "unknown %tddft entry '" + e.key + "'");
      }
      spec.tddft = td;
    } else if (name == "output") {
      spec.output_prints = body;
    } else {
      throw Error(Errc::parse, "unsupported block %" + name);
    }
  }

  if (!have_keywords) throw Error(Errc::parse, "input has no keyword line");
  if (!have_geometry) throw Error(Errc::parse, "input has no geometry line");
  return spec;
}

bool KeywordCatalog::allows_keyword(std::string_view token) const { return keyword_line.count(text::upper(token)) > 0; }

bool KeywordCatalog::allows_block(std::string_view block, std::string_view identifier) const {
  auto it = blocks.find(text::lower(block));
  return it != blocks.end() && it->second.count(text::upper(identifier)) > 0;
}

KeywordCatalog KeywordCatalog::defaults() {
  KeywordCatalog c;
  for (const char* t : {"OPT", "FREQ", "SP", "PBE0", "def2-SVP", "D4", "RIJCOSX", "DEFGRID2", "TightSCF",
                        "wB97M-V", "def2-SVPD", "RI-wB2PLYP", "def2-mSVP", "AutoAux"}) {
    c.keyword_line.insert(text::upper(t));
  }
  c.blocks["pal"] = {"NPROCS"};
  c.blocks["basis"] = {"BASIS", "ECP"};
  c.blocks["scf"] = {"AUTOTRAH", "MAXITER"};
  c.blocks["geom"] = {"MAXITER", "COORDSYS", "CARTFALLBACK", "REDUCEPRINT"};
  c.blocks["cpcm"] = {"SMD", "SMDSOLVENT"};
  c.blocks["tddft"] = {"NROOTS", "TRIPLETS", "IROOT", "TDA"};
  c.blocks["output"] = {"PRINT"};
  return c;
}

KeywordCatalog KeywordCatalog::parse(std::string_view input) {
  KeywordCatalog c;
  std::string section;
  bool any = false;
  for (const auto& raw : text::lines(input)) {
    auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(Errc::parse, "catalog: bad section header '" + std::string(line) + "'");
      section = text::lower(text::trim(line.substr(1, line.size() - 2)));
      if (section != "keyword_line" && section != "limits" && !text::starts_with(section, "block ")) {
        throw Error(Errc::parse, "catalog: unknown section '" + section + "'");
      }
      if (text::starts_with(section, "block ")) c.blocks[std::string(text::trim(section.substr(6)))];
      any = true;
      continue;
    }
    if (section.empty()) throw Error(Errc::parse, "catalog: token outside a section");
    if (section == "keyword_line") {
      c.keyword_line.insert(text::upper(line));
    } else if (section == "limits") {
      auto f = text::split_ws(line);
      auto v = f.size() == 2 ? text::parse_int(f[1]) : std::nullopt;
      if (!v) throw Error(Errc::parse, "catalog: bad limit '" + std::string(line) + "'");
      if (f[0] == "nprocs_min") c.nprocs_min = static_cast<int>(*v);
      else if (f[0] == "nprocs_max") c.nprocs_max = static_cast<int>(*v);
      else if (f[0] == "maxcore_default") c.maxcore_default = static_cast<int>(*v);
      else throw Error(Errc::parse, "catalog: unknown limit '" + f[0] + "'");
    } else {
      c.blocks[std::string(text::trim(section.substr(6)))].insert(text::upper(line));
    }
  }
  if (!any) throw Error(Errc::parse, "catalog is empty");
  if (c.nprocs_min < 1 || c.nprocs_max < c.nprocs_min) throw Error(Errc::parse, "catalog: bad nprocs range");
  return c;
}

std::string KeywordCatalog::serialize() const {
  std::ostringstream os;
  os << "[keyword_line]\n";
  for (const auto& t : keyword_line) os << t << '\n';
  for (const auto& [block, ids] : blocks) {
    os << "\n[block " << block << "]\n";
    for (const auto& t : ids) os << t << '\n';
  }
  os << "\n[limits]\nnprocs_min " << nprocs_min << "\nnprocs_max " << nprocs_max << "\nmaxcore_default "
     << maxcore_default << '\n';
  return os.str();
}

std::string directive_identifier(std::string_view line) {
  auto t = text::trim(line);
  auto end = t.find_first_of("[ \t");
  return std::string(t.substr(0, end));
}

std::vector<Violation> validate_spec(const CalcSpec& spec, const KeywordCatalog& catalog) {
  std::vector<Violation> out;
  auto keyword = [&](std::string_view tok) {
    if (!catalog.allows_keyword(tok)) out.push_back({text::upper(tok), "keyword_line"});
  };
  auto rt = spec.canonical_runtypes();
  for (auto r : {RunType::OPT, RunType::FREQ, RunType::SP}) {
    if (rt.count(r)) keyword(to_string(r));
  }
  keyword(spec.functional);
  keyword(spec.basis);
  if (spec.dispersion) keyword(*spec.dispersion);
  for (const auto& a : spec.approximations) keyword(a);
  if (spec.grid) keyword(*spec.grid);
  for (const auto& k : spec.extra_keywords) keyword(k);
  if (spec.scf_convergence) keyword(*spec.scf_convergence);

  auto block = [&](const std::string& name, std::string_view id) {
    if (!catalog.allows_block(name, id)) out.push_back({text::upper(id), "block(" + name + ")"});
  };
  if (spec.nprocs < catalog.nprocs_min || spec.nprocs > catalog.nprocs_max) {
    out.push_back({"NPROCS=" + std::to_string(spec.nprocs), "block(pal)"});
  }
  if (spec.basis_block) {
    if (!spec.basis_block->basis.empty()) block("basis", "Basis");
    if (!spec.basis_block->ecp.empty()) block("basis", "ECP");
  }
  for (const auto& e : spec.scf_block) block("scf", e.key);
  if (spec.geom_block) {
    for (const auto& e : *spec.geom_block) block("geom", e.key);
  }
  if (spec.cpcm_solvent) {
    block("cpcm", "smd");
    block("cpcm", "SMDsolvent");
  }
  if (spec.tddft) {
    block("tddft", "NRoots");
    block("tddft", "Triplets");
  }
  for (const auto& p : spec.output_prints) block("output", directive_identifier(p));
  return out;
}

namespace {

nlohmann::json entries_json(const std::vector<BlockEntry>& entries) {
  auto arr = nlohmann::json::array();
  for (const auto& e : entries) arr.push_back({e.key, e.value});
  return arr;
}

std::vector<BlockEntry> entries_from(const nlohmann::json& j) {
  std::vector<BlockEntry> out;
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      out.push_back({it.key(), it.value().is_string() ? it.value().get<std::string>() : it.value().dump()});
    }
    return out;
  }
  for (const auto& e : j) {
    if (e.is_string()) {
      out.push_back(entry_from_line(e.get<std::string>()));
    } else if (e.is_array() && e.size() == 2) {
      out.push_back({e[0].get<std::string>(), e[1].is_string() ? e[1].get<std::string>() : e[1].dump()});
    } else {
      throw Error(Errc::parse, "block entries must be [key, value] pairs");
    }
  }
  return out;
}

}  // namespace

nlohmann::json to_json(const CalcSpec& s) {
  nlohmann::json j;
  auto rt = nlohmann::json::array();
  for (auto r : s.runtypes) rt.push_back(to_string(r));
  j["runtypes"] = rt;
  j["functional"] = s.functional;
  j["basis"] = s.basis;
  if (s.dispersion) j["dispersion"] = *s.dispersion;
  j["approximations"] = s.approximations;
  if (s.grid) j["grid"] = *s.grid;
  j["extra_keywords"] = s.extra_keywords;
  if (s.scf_convergence) j["scf_convergence"] = *s.scf_convergence;
  j["maxcore"] = s.maxcore;
  j["nprocs"] = s.nprocs;
  if (s.basis_block) j["basis_block"] = {{"basis", s.basis_block->basis}, {"ecp", s.basis_block->ecp}};
  j["scf_block"] = entries_json(s.scf_block);
  if (s.geom_block) j["geom_block"] = entries_json(*s.geom_block);
  if (s.cpcm_solvent) j["cpcm_solvent"] = *s.cpcm_solvent;
  if (s.tddft) j["tddft"] = {{"nroots", s.tddft->nroots}, {"triplets", s.tddft->triplets}};
  j["output_prints"] = s.output_prints;
  j["geometry"] = {{"charge", s.geometry.charge},
                   {"multiplicity", s.geometry.multiplicity},
                   {"xyz_file", s.geometry.xyz_file}};
  return j;
}

CalcSpec spec_from_json(const nlohmann::json& j) {
  try {
    CalcSpec s;
    for (const auto& r : j.at("runtypes")) {
      auto rt = parse_runtype(r.get<std::string>());
      if (!rt) throw Error(Errc::parse, "unknown run type '" + r.get<std::string>() + "'");
      s.runtypes.push_back(*rt);
    }
    s.functional = j.at("functional").get<std::string>();
    s.basis = j.at("basis").get<std::string>();
    if (j.contains("dispersion")) s.dispersion = j["dispersion"].get<std::string>();
    if (j.contains("approximations")) s.approximations = j["approximations"].get<std::vector<std::string>>();
    if (j.contains("grid")) s.grid = j["grid"].get<std::string>();
    if (j.contains("extra_keywords")) s.extra_keywords = j["extra_keywords"].get<std::vector<std::string>>();
    if (j.contains("scf_convergence")) s.scf_convergence = j["scf_convergence"].get<std::string>();
    s.maxcore = j.value("maxcore", 4000);
    s.nprocs = j.value("nprocs", 1);
    if (j.contains("basis_block")) {
      s.basis_block = BasisBlock{j["basis_block"].value("basis", ""), j["basis_block"].value("ecp", "")};
    }
    if (j.contains("scf_block")) s.scf_block = entries_from(j["scf_block"]);
    if (j.contains("geom_block")) s.geom_block = entries_from(j["geom_block"]);
    if (j.contains("cpcm_solvent")) s.cpcm_solvent = j["cpcm_solvent"].get<std::string>();
    if (j.contains("tddft")) s.tddft = TddftBlock{j["tddft"].value("nroots", 5), j["tddft"].value("triplets", false)};
    if (j.contains("output_prints")) s.output_prints = j["output_prints"].get<std::vector<std::string>>();
    if (j.contains("geometry")) {
      const auto& g = j["geometry"];
      s.geometry.charge = g.value("charge", 0);
      s.geometry.multiplicity = g.value("multiplicity", 1);
      s.geometry.xyz_file = g.value("xyz_file", "");
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse, std::string("calc spec json: ") + e.what());
  }
}

}  // namespace chemflow::orca
