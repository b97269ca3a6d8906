#include "hwut/stimulus.hpp"

#include <cctype>
#include <charconv>
#include <sstream>

#include "hwut/error.hpp"

namespace hwut {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

[[noreturn]] void malformed(int line, const std::string& msg) {
  throw Error(Errc::kMalformedStimulus, "line " + std::to_string(line) + ": " + msg,
              line, 1);
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) {
    return false;
  }
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$')) {
      return false;
    }
  }
  return true;
}

PortInfo parse_column(std::string_view item, int line) {
  item = trim(item);
  size_t open = item.find('[');
  if (open == std::string_view::npos || item.back() != ']') {
    malformed(line, "expected name[width], got '" + std::string(item) + "'");
  }
  PortInfo p;
  std::string_view name = trim(item.substr(0, open));
  if (!is_identifier(name)) {
    malformed(line, "bad input name '" + std::string(name) + "'");
  }
  p.name = std::string(name);
  std::string_view w = trim(item.substr(open + 1, item.size() - open - 2));
  auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), p.width);
  if (ec != std::errc() || ptr != w.data() + w.size() || p.width < 1 || p.width > 64) {
    malformed(line, "bad width for '" + p.name + "'");
  }
  return p;
}

}  // namespace

std::string format_stimulus(const UnitTest& test) {
  std::string out = "inputs:";
  for (size_t i = 0; i < test.inputs.size(); ++i) {
    out += (i == 0 ? " " : ", ") + test.inputs[i].name + "[" +
           std::to_string(test.inputs[i].width) + "]";
  }
  out += '\n';
  for (const auto& row : test.rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out += ' ';
      const int w = test.inputs[i].width;
      for (int b = w - 1; b >= 0; --b) out += ((row[i] >> b) & 1) ? '1' : '0';
    }
    out += '\n';
  }
  return out;
}

UnitTest parse_stimulus(std::string_view text, std::string id) {
  UnitTest t;
  t.id = std::move(id);
  bool have_header = false;
  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (size_t hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;

    if (!have_header) {
      constexpr std::string_view kHeader = "inputs:";
      if (line.substr(0, kHeader.size()) != kHeader) {
        malformed(line_no, "expected 'inputs:' header");
      }
      std::string_view list = trim(line.substr(kHeader.size()));
      if (list.empty()) malformed(line_no, "header lists no inputs");
      size_t start = 0;
      while (start <= list.size()) {
        size_t comma = list.find(',', start);
        std::string_view item = list.substr(
            start, comma == std::string_view::npos ? list.size() - start : comma - start);
        PortInfo p = parse_column(item, line_no);
        for (const PortInfo& q : t.inputs) {
          if (q.name == p.name) malformed(line_no, "input '" + p.name + "' listed twice");
        }
        t.inputs.push_back(p);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
      have_header = true;
      continue;
    }

    std::vector<uint64_t> row;
    std::istringstream in{std::string(line)};
    std::string tok;
    while (in >> tok) {
      if (row.size() == t.inputs.size()) {
        malformed(line_no, "more values than inputs (" +
                               std::to_string(t.inputs.size()) + ")");
      }
      const PortInfo& col = t.inputs[row.size()];
      if (tok.size() > static_cast<size_t>(col.width)) {
        malformed(line_no, "value '" + tok + "' is wider than " + col.name + "[" +
                               std::to_string(col.width) + "]");
      }
      uint64_t v = 0;
      for (char c : tok) {
        if (c != '0' && c != '1') {
          malformed(line_no, "value '" + tok + "' is not binary");
        }
        v = (v << 1) | static_cast<uint64_t>(c - '0');
      }
      row.push_back(v);
    }
    if (row.size() != t.inputs.size()) {
      malformed(line_no, "expected " + std::to_string(t.inputs.size()) +
                             " values, got " + std::to_string(row.size()));
    }
    t.rows.push_back(std::move(row));
  }
  if (!have_header) malformed(line_no, "missing 'inputs:' header");
  if (t.rows.empty()) malformed(line_no, "stimulus has no cycles");
  return t;
}

void check_conforms(const UnitTest& test, const DesignSignature& signature) {
  const std::vector<PortInfo> want = signature.stimulus_inputs();
  if (test.inputs != want) {
    std::string w, g;
    for (const auto& p : want) w += " " + p.name + "[" + std::to_string(p.width) + "]";
    for (const auto& p : test.inputs) g += " " + p.name + "[" + std::to_string(p.width) + "]";
    throw Error(Errc::kStimulusMismatch,
                "test '" + test.id + "' columns" + g + " do not match design inputs" + w);
  }
  if (test.rows.empty()) {
    throw Error(Errc::kStimulusMismatch, "test '" + test.id + "' has no cycles");
  }
  for (size_t n = 0; n < test.rows.size(); ++n) {
    const auto& row = test.rows[n];
    if (row.size() != want.size()) {
      throw Error(Errc::kStimulusMismatch,
                  "cycle " + std::to_string(n) + " has the wrong number of values");
    }
    for (size_t i = 0; i < row.size(); ++i) {
      if (row[i] & ~width_mask(want[i].width)) {
        throw Error(Errc::kStimulusMismatch, "cycle " + std::to_string(n) +
                                                 ": value does not fit " + want[i].name);
      }
    }
  }
}

UnitTest exhaustive_test(const DesignSignature& signature, int max_bits) {
  UnitTest t;
  t.id = "exhaustive";
  t.inputs = signature.stimulus_inputs();
  int bits = 0;
  for (const auto& p : t.inputs) bits += p.width;
  if (bits > max_bits) {
    throw Error(Errc::kInvalidArgument,
                std::to_string(bits) + " input bits is too many to enumerate");
  }
  const uint64_t count = uint64_t{1} << bits;
  for (uint64_t k = 0; k < count; ++k) {
    std::vector<uint64_t> row(t.inputs.size());
    int shift = 0;
    for (size_t i = t.inputs.size(); i-- > 0;) {
      row[i] = (k >> shift) & width_mask(t.inputs[i].width);
      shift += t.inputs[i].width;
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

UnitTest random_test(const DesignSignature& signature, int cycles,
                     std::mt19937_64& rng) {
  UnitTest t;
  t.id = "random";
  t.inputs = signature.stimulus_inputs();
  int reset_col = -1;
  if (signature.reset) {
    for (size_t i = 0; i < t.inputs.size(); ++i) {
      if (t.inputs[i].name == signature.reset->name) reset_col = static_cast<int>(i);
    }
  }
  for (int n = 0; n < cycles; ++n) {
    std::vector<uint64_t> row(t.inputs.size());
    for (size_t i = 0; i < row.size(); ++i) {
      row[i] = rng() & width_mask(t.inputs[i].width);
    }
    if (reset_col >= 0) {
      // Raw engine bits keep the sequence identical across standard libraries.
      const bool assert_reset = n == 0 || (rng() & 15) == 0;
      const bool high = signature.reset->active_high;
      row[static_cast<size_t>(reset_col)] = (assert_reset == high) ? 1 : 0;
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace hwut
