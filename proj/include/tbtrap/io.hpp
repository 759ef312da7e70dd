#pragma once

// File formats and the cipher config loader.
//
//   S-box file:     2^m whitespace-separated hex values, position i = image of i.
//   Matrix file:    n lines of n characters '0'/'1'; line k = row k (image of
//                   e_k), character position 0 = bit 0.
//   Subspace file:  one basis vector per line, same character format.
//   Partition file: one block per line as comma-separated hex vectors,
//                   blocks sorted by minimal member.
//   Cipher config:  JSON; see README for the schedule schemas.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tbtrap/cipher.hpp"
#include "tbtrap/f2lin.hpp"
#include "tbtrap/partition.hpp"
#include "tbtrap/sbox.hpp"

namespace tbtrap {

struct ParseError : std::runtime_error {
  ParseError(const std::string& path, int line, int column, const std::string& msg)
      : std::runtime_error(path + ":" + std::to_string(line) + ":" +
                           std::to_string(column) + ": " + msg) {}
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path + ": cannot open file for writing");
  out << content;
}

// ---- S-box files ----

inline SBox read_sbox_file(const std::string& path) {
  std::string text = read_file(path);
  std::vector<std::uint16_t> values;
  int line = 1, col = 1;
  std::size_t i = 0;
  while (i < text.size()) {
    char ch = text[i];
    if (ch == '\n') { ++line; col = 1; ++i; continue; }
    if (std::isspace(static_cast<unsigned char>(ch))) { ++col; ++i; continue; }
    std::size_t start = i;
    int start_col = col;
    unsigned long v = 0;
    while (i < text.size() && std::isxdigit(static_cast<unsigned char>(text[i]))) {
      v = v * 16 + (std::isdigit(static_cast<unsigned char>(text[i]))
                        ? text[i] - '0'
                        : (std::tolower(text[i]) - 'a' + 10));
      ++i; ++col;
    }
    if (i == start)
      throw ParseError(path, line, start_col, "expected a hexadecimal value");
    if (v > 0xffff) throw ParseError(path, line, start_col, "value out of range");
    values.push_back(std::uint16_t(v));
  }
  int m = 0;
  while ((std::size_t(1) << m) < values.size()) ++m;
  if (values.empty() || (std::size_t(1) << m) != values.size())
    throw ParseError(path, line, col, "S-box table length must be a power of two");
  return SBox(m, std::move(values));
}

inline std::string format_sbox(const SBox& s) {
  std::ostringstream out;
  for (std::size_t i = 0; i < s.table.size(); ++i) {
    if (i) out << (i % 16 == 0 ? '\n' : ' ');
    char buf[8];
    std::snprintf(buf, sizeof buf, "%x", unsigned(s.table[i]));
    out << buf;
  }
  out << '\n';
  return out.str();
}

// ---- bit-row files (matrices and subspaces) ----

namespace detail {

inline std::vector<word> read_bit_rows(const std::string& path, int* width_out) {
  std::string text = read_file(path);
  std::vector<word> rows;
  int width = -1;
  int line = 1;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t eol = text.find('\n', i);
    if (eol == std::string::npos) eol = text.size();
    std::string row = text.substr(i, eol - i);
    while (!row.empty() && (row.back() == '\r' || row.back() == ' ')) row.pop_back();
    if (!row.empty()) {
      word v = 0;
      for (std::size_t k = 0; k < row.size(); ++k) {
        if (row[k] == '1')
          v |= word(1) << k;
        else if (row[k] != '0')
          throw ParseError(path, line, int(k) + 1, "expected '0' or '1'");
      }
      if (width < 0)
        width = int(row.size());
      else if (int(row.size()) != width)
        throw ParseError(path, line, 1, "inconsistent row length");
      rows.push_back(v);
    }
    i = eol + 1;
    ++line;
  }
  if (rows.empty()) throw ParseError(path, 1, 1, "empty file");
  *width_out = width;
  return rows;
}

inline std::string format_bit_row(word v, int n) {
  std::string s(std::size_t(n), '0');
  for (int k = 0; k < n; ++k)
    if ((v >> k) & 1) s[std::size_t(k)] = '1';
  return s;
}

}  // namespace detail

inline LinearMap read_matrix_file(const std::string& path) {
  int width = 0;
  std::vector<word> rows = detail::read_bit_rows(path, &width);
  if (int(rows.size()) != width)
    throw ParseError(path, 1, 1, "matrix must be square (n lines of n characters)");
  return LinearMap(std::move(rows), width);
}

inline std::string format_matrix(const LinearMap& lm) {
  std::string out;
  for (word row : lm.rows()) out += detail::format_bit_row(row, lm.dim()) + "\n";
  return out;
}

inline Subspace read_subspace_file(const std::string& path) {
  int width = 0;
  std::vector<word> rows = detail::read_bit_rows(path, &width);
  return Subspace::span(rows, width);
}

inline std::string format_subspace(const Subspace& s) {
  std::string out;
  for (word row : s.basis()) out += detail::format_bit_row(row, s.ambient_dim()) + "\n";
  if (s.basis().empty()) out = "";  // zero subspace: empty basis file
  return out;
}

inline std::string format_partition(const Partition& p) {
  std::ostringstream out;
  for (const auto& block : p.blocks()) {
    for (std::size_t i = 0; i < block.size(); ++i) {
      char buf[8];
      std::snprintf(buf, sizeof buf, "%x", unsigned(block[i]));
      out << (i ? "," : "") << buf;
    }
    out << '\n';
  }
  return out.str();
}

// ---- builtin components ----

inline bool is_builtin(const std::string& spec) { return spec.rfind("builtin:", 0) == 0; }

inline SBox builtin_sbox(const std::string& spec) {
  if (spec.rfind("builtin:inv", 0) == 0) {
    int m = std::stoi(spec.substr(11));
    if (m < 2 || m > 8) throw ParseError("builtin inversion S-box needs m in 2..8");
    return gf_inverse_sbox(GFContext(m));
  }
  if (spec.rfind("builtin:id", 0) == 0) {
    int m = std::stoi(spec.substr(10));
    if (m < 1 || m > 8) throw ParseError("builtin identity S-box needs m in 1..8");
    return identity_sbox(m);
  }
  throw ParseError("unknown builtin S-box: " + spec);
}

// ---- cipher config (JSON) ----

namespace detail {

inline word parse_hex_word(const nlohmann::json& j, int n, const std::string& what) {
  if (!j.is_string()) throw ParseError(what + ": expected a hex string");
  const std::string s = j.get<std::string>();
  if (s.empty()) throw ParseError(what + ": empty hex string");
  unsigned long v = 0;
  for (char ch : s) {
    if (!std::isxdigit(static_cast<unsigned char>(ch)))
      throw ParseError(what + ": bad hex digit '" + std::string(1, ch) + "'");
    v = v * 16 + (std::isdigit(static_cast<unsigned char>(ch))
                      ? ch - '0'
                      : (std::tolower(ch) - 'a' + 10));
  }
  if (v & ~std::uint64_t(dim_mask(n)))
    throw ParseError(what + ": value does not fit in " + std::to_string(n) + " bits");
  return word(v);
}

inline Subspace parse_subspace(const nlohmann::json& j, int n, const std::string& what) {
  if (!j.is_array()) throw ParseError(what + ": expected an array of basis vectors");
  Subspace s(n);
  for (const auto& e : j) s.insert(parse_hex_word(e, n, what));
  return s;
}

inline std::string hex_of(word v) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%x", unsigned(v));
  return buf;
}

}  // namespace detail

inline KeySchedule parse_key_schedule(const nlohmann::json& j, int rounds, int n) {
  if (!j.is_object() || !j.contains("variant"))
    throw ParseError("key_schedule: expected an object with a 'variant' field");
  const std::string variant = j.at("variant").get<std::string>();

  auto parse_fixed = [&](const nlohmann::json& arr, int window_i) {
    if (!arr.is_array() || int(arr.size()) != rounds)
      throw ParseError("key_schedule.fixed_keys: need one entry per round");
    std::vector<word> fixed(std::size_t(rounds), 0);
    for (int h = 0; h < rounds; ++h) {
      bool in_window = h >= window_i - 2 && h <= window_i;
      if (arr[std::size_t(h)].is_null()) {
        if (!in_window)
          throw ParseError("key_schedule.fixed_keys: null outside the window");
        continue;
      }
      if (in_window)
        throw ParseError("key_schedule.fixed_keys: window rounds must be null");
      fixed[std::size_t(h)] = detail::parse_hex_word(arr[std::size_t(h)], n,
                                                     "key_schedule.fixed_keys");
    }
    return fixed;
  };

  if (variant == "explicit") {
    ExplicitSchedule e;
    for (const auto& t : j.at("tuples")) {
      std::vector<word> tuple;
      for (const auto& k : t)
        tuple.push_back(detail::parse_hex_word(k, n, "key_schedule.tuples"));
      e.tuples.push_back(std::move(tuple));
    }
    return KeySchedule(rounds, n, std::move(e));
  }
  if (variant == "three_independent") {
    ThreeIndependentSchedule t;
    t.round_i = j.at("i").get<int>();
    t.fixed = parse_fixed(j.at("fixed_keys"), t.round_i);
    return KeySchedule(rounds, n, std::move(t));
  }
  if (variant == "almost_independent") {
    AlmostIndependentSchedule a;
    a.round_i = j.at("i").get<int>();
    a.U1 = detail::parse_subspace(j.at("U1"), n, "key_schedule.U1");
    a.U2 = detail::parse_subspace(j.at("U2"), n, "key_schedule.U2");
    a.U3 = detail::parse_subspace(j.at("U3"), n, "key_schedule.U3");
    a.fixed = parse_fixed(j.at("fixed_keys"), a.round_i);
    return KeySchedule(rounds, n, std::move(a));
  }
  if (variant == "example_linear") {
    ExampleLinearSchedule e;
    e.f1 = detail::parse_hex_word(j.at("f1"), n, "key_schedule.f1");
    e.f2 = detail::parse_hex_word(j.at("f2"), n, "key_schedule.f2");
    e.f3 = detail::parse_hex_word(j.at("f3"), n, "key_schedule.f3");
    const auto& tail = j.at("tail");
    if (!tail.is_array() || tail.size() != 8)
      throw ParseError("key_schedule.tail: need 8 bit-pattern entries");
    for (const auto& per_bits : tail) {
      std::vector<std::vector<word>> rows;
      for (const auto& row : per_bits) {
        std::vector<word> keys;
        for (const auto& k : row)
          keys.push_back(detail::parse_hex_word(k, n, "key_schedule.tail"));
        rows.push_back(std::move(keys));
      }
      e.tail.push_back(std::move(rows));
    }
    return KeySchedule(rounds, n, std::move(e));
  }
  throw ParseError("key_schedule: unknown variant '" + variant + "'");
}

// Loads a cipher config; relative asset paths resolve against the config
// file's directory.
inline TbCipher load_cipher_config(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  std::filesystem::path base = std::filesystem::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp.string() : (base / fp).string();
  };

  int n = j.at("n").get<int>();
  int b = j.at("b").get<int>();
  int m = j.at("m").get<int>();
  std::vector<Round> rounds;
  for (const auto& r : j.at("rounds")) {
    std::vector<SBox> boxes;
    const auto& sbox_spec = r.at("sbox");
    auto load_box = [&](const nlohmann::json& e) {
      const std::string s = e.get<std::string>();
      return is_builtin(s) ? builtin_sbox(s) : read_sbox_file(resolve(s));
    };
    if (sbox_spec.is_array()) {
      for (const auto& e : sbox_spec) boxes.push_back(load_box(e));
    } else {
      boxes.assign(std::size_t(b), load_box(sbox_spec));
    }
    LinearMap lambda;
    const std::string mat = r.at("matrix").get<std::string>();
    if (mat == "builtin:id")
      lambda = LinearMap::identity(n);
    else
      lambda = read_matrix_file(resolve(mat));
    rounds.push_back(Round{ParallelMap(b, m, std::move(boxes)), std::move(lambda)});
  }
  KeySchedule ks = parse_key_schedule(j.at("key_schedule"), int(rounds.size()), n);
  return TbCipher(n, b, m, std::move(rounds), std::move(ks));
}

// Writes a cipher (with per-round asset files) into a directory; returns the
// config path. Boxes and matrices land next to the config as .sbox/.mat.
inline std::string save_cipher_config(const TbCipher& c, const std::string& dir,
                                      const std::string& name) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json j;
  j["n"] = c.dim();
  j["b"] = c.blocks();
  j["m"] = c.block_width();
  nlohmann::json rounds = nlohmann::json::array();
  for (int h = 0; h < c.round_count(); ++h) {
    const Round& r = c.rounds()[std::size_t(h)];
    nlohmann::json jr;
    nlohmann::json boxes = nlohmann::json::array();
    for (int bi = 0; bi < c.blocks(); ++bi) {
      std::string fname = name + ".r" + std::to_string(h + 1) + "b" +
                          std::to_string(bi + 1) + ".sbox";
      write_file((fs::path(dir) / fname).string(),
                 format_sbox(r.gamma.boxes[std::size_t(bi)]));
      boxes.push_back(fname);
    }
    jr["sbox"] = boxes;
    std::string mname = name + ".r" + std::to_string(h + 1) + ".mat";
    write_file((fs::path(dir) / mname).string(), format_matrix(r.lambda));
    jr["matrix"] = mname;
    rounds.push_back(jr);
  }
  j["rounds"] = rounds;

  nlohmann::json ks;
  const KeySchedule& sched = c.schedule();
  if (auto* e = sched.get_if<ExplicitSchedule>()) {
    ks["variant"] = "explicit";
    nlohmann::json tuples = nlohmann::json::array();
    for (const auto& t : e->tuples) {
      nlohmann::json jt = nlohmann::json::array();
      for (word k : t) jt.push_back(detail::hex_of(k));
      tuples.push_back(jt);
    }
    ks["tuples"] = tuples;
  } else if (auto* th = sched.get_if<ThreeIndependentSchedule>()) {
    ks["variant"] = "three_independent";
    ks["i"] = th->round_i;
    nlohmann::json fixed = nlohmann::json::array();
    for (int h = 0; h < sched.rounds(); ++h) {
      if (h >= th->round_i - 2 && h <= th->round_i)
        fixed.push_back(nullptr);
      else
        fixed.push_back(detail::hex_of(th->fixed[std::size_t(h)]));
    }
    ks["fixed_keys"] = fixed;
  } else if (auto* al = sched.get_if<AlmostIndependentSchedule>()) {
    ks["variant"] = "almost_independent";
    ks["i"] = al->round_i;
    auto dump_subspace = [](const Subspace& s) {
      nlohmann::json arr = nlohmann::json::array();
      for (word r : s.basis()) arr.push_back(detail::hex_of(r));
      return arr;
    };
    ks["U1"] = dump_subspace(al->U1);
    ks["U2"] = dump_subspace(al->U2);
    ks["U3"] = dump_subspace(al->U3);
    nlohmann::json fixed = nlohmann::json::array();
    for (int h = 0; h < sched.rounds(); ++h) {
      if (h >= al->round_i - 2 && h <= al->round_i)
        fixed.push_back(nullptr);
      else
        fixed.push_back(detail::hex_of(al->fixed[std::size_t(h)]));
    }
    ks["fixed_keys"] = fixed;
  } else if (auto* ex = sched.get_if<ExampleLinearSchedule>()) {
    ks["variant"] = "example_linear";
    ks["f1"] = detail::hex_of(ex->f1);
    ks["f2"] = detail::hex_of(ex->f2);
    ks["f3"] = detail::hex_of(ex->f3);
    nlohmann::json tail = nlohmann::json::array();
    for (const auto& per_bits : ex->tail) {
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& row : per_bits) {
        nlohmann::json keys = nlohmann::json::array();
        for (word k : row) keys.push_back(detail::hex_of(k));
        rows.push_back(keys);
      }
      tail.push_back(rows);
    }
    ks["tail"] = tail;
  }
  j["key_schedule"] = ks;

  std::string cfg_path = (fs::path(dir) / (name + ".json")).string();
  write_file(cfg_path, j.dump(2) + "\n");
  return cfg_path;
}

}  // namespace tbtrap
