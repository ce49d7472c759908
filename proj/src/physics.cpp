// SPDX-License-Identifier: Apache-2.0
#include "hexhp/physics.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "hexhp/error.hpp"

namespace hexhp {

int PhysicsTable::nrindex() const {
  int n = 0;
  for (const auto& a : attrs) n += a.ncomp;
  return n;
}

int PhysicsTable::comp_offset(int a) const {
  if (a < 0 || a >= nr_physa()) fail(ErrorCode::Contract, "attribute index out of range");
  int n = 0;
  for (int i = 0; i < a; ++i) n += attrs[i].ncomp;
  return n;
}

void PhysicsTable::validate() const {
  if (attrs.empty()) fail(ErrorCode::Config, "physics table has no attributes");
  for (size_t i = 0; i < attrs.size(); ++i) {
    const auto& a = attrs[i];
    if (a.ncomp < 1) fail(ErrorCode::Config, "attribute '" + a.nickname + "' has ncomp < 1");
    if (a.is_trace && a.space == Space::L2)
      fail(ErrorCode::Config, "attribute '" + a.nickname + "': a discon variable has no trace");
    if (i > 0 && static_cast<int>(a.space) < static_cast<int>(attrs[i - 1].space))
      fail(ErrorCode::Config, "attribute '" + a.nickname +
                                  "' breaks the contin/tangen/normal/discon ordering");
  }
}

Space parse_space_tag(const std::string& tag) {
  if (tag == "contin") return Space::H1;
  if (tag == "tangen") return Space::HCurl;
  if (tag == "normal") return Space::HDiv;
  if (tag == "discon") return Space::L2;
  fail(ErrorCode::Config, "unknown space tag '" + tag + "'");
}

namespace {

bool next_content_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    auto p = line.find_first_not_of(" \t\r");
    if (p != std::string::npos && line[p] != '#') return true;
  }
  return false;
}

int leading_int(const std::string& line, const char* what) {
  std::istringstream ss(line);
  int v;
  if (!(ss >> v)) fail(ErrorCode::Config, std::string("physics file: expected ") + what);
  return v;
}

std::ifstream open_or_fail(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, std::string("cannot open ") + what + " '" + path + "'");
  return in;
}

bool parse_flag(const std::string& key, std::string v) {
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "1" || v == "true" || v == ".true.") return true;
  if (v == "0" || v == "false" || v == ".false.") return false;
  fail(ErrorCode::Config, "control key " + key + ": expected 0/1, got '" + v + "'");
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    int r = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    fail(ErrorCode::Config, "control key " + key + ": expected an integer, got '" + v + "'");
  }
}

}  // namespace

PhysicsTable parse_physics(std::istream& in) {
  PhysicsTable t;
  std::string line;
  if (!next_content_line(in, line)) fail(ErrorCode::Config, "physics file: missing MAXNODS line");
  t.maxnods = leading_int(line, "MAXNODS");
  if (!next_content_line(in, line)) fail(ErrorCode::Config, "physics file: missing NR_PHYSA line");
  int n = leading_int(line, "NR_PHYSA");
  if (n < 1) fail(ErrorCode::Config, "physics file: NR_PHYSA must be positive");
  while (next_content_line(in, line)) {
    std::istringstream ss(line);
    PhysicsAttr a;
    std::string tag;
    if (!(ss >> a.nickname >> tag >> a.ncomp))
      fail(ErrorCode::Config, "physics file: malformed attribute line '" + line + "'");
    a.space = parse_space_tag(tag);
    t.attrs.push_back(a);
  }
  if (static_cast<int>(t.attrs.size()) != n)
    fail(ErrorCode::Config, "physics file: NR_PHYSA=" + std::to_string(n) + " but " +
                                std::to_string(t.attrs.size()) + " attribute lines");
  t.validate();
  return t;
}

PhysicsTable read_physics(const std::string& path) {
  auto in = open_or_fail(path, "physics file");
  return parse_physics(in);
}

Parameters parse_control(std::istream& in) {
  Parameters p;
  std::string line;
  while (std::getline(in, line)) {
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ss(line);
    std::string key, value, extra;
    if (!(ss >> key)) continue;
    if (!(ss >> value)) fail(ErrorCode::Config, "control key " + key + " has no value");
    if (ss >> extra) fail(ErrorCode::Config, "control line '" + line + "' has trailing tokens");
    if (key == "NEXACT") {
      p.nexact = parse_int(key, value);
      if (p.nexact != 0 && p.nexact != 1) fail(ErrorCode::Config, "NEXACT must be 0 or 1");
    } else if (key == "EXGEOM") {
      p.exgeom = parse_int(key, value);
      if (p.exgeom == 1) fail(ErrorCode::Unsupported, "EXGEOM=1 (exact geometry) is not supported");
      if (p.exgeom != 0) fail(ErrorCode::Config, "EXGEOM must be 0");
    } else if (key == "NORD_ADD") {
      p.nord_add = parse_int(key, value);
      if (p.nord_add < 1 || p.nord_add > kMaxEnrichment)
        fail(ErrorCode::Config, "NORD_ADD must lie in [1,3]");
    } else if (key == "ISTC_FLAG") {
      p.istc = parse_flag(key, value);
    } else if (key == "STORE_STC") {
      p.store_stc = parse_flag(key, value);
    } else if (key == "HERM_STC") {
      p.herm_stc = parse_flag(key, value);
    } else {
      fail(ErrorCode::Config, "unknown control key '" + key + "'");
    }
  }
  return p;
}

Parameters read_control(const std::string& path) {
  auto in = open_or_fail(path, "control file");
  return parse_control(in);
}

int encode_bc(const std::array<int, 6>& flags) {
  int code = 0, scale = 1;
  for (int f = 0; f < 6; ++f) {
    if (flags[f] < 0 || flags[f] > 9) fail(ErrorCode::Config, "BC flag digit outside 0..9");
    code += flags[f] * scale;
    scale *= 10;
  }
  return code;
}

std::array<int, 6> decode_bc(int code) {
  if (code < 0 || code > 999999) fail(ErrorCode::Config, "BC code outside 0..999999");
  std::array<int, 6> f{};
  for (int i = 0; i < 6; ++i) {
    f[i] = code % 10;
    code /= 10;
  }
  return f;
}

}  // namespace hexhp
