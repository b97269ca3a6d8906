#include "hwut/vcd.hpp"

#include <map>
#include <sstream>

#include "hwut/error.hpp"

namespace hwut {
namespace {

// Printable ASCII identifiers '!'..'~', base 94.
std::string vcd_id(size_t index) {
  std::string id;
  do {
    id += static_cast<char>('!' + index % 94);
    index /= 94;
  } while (index > 0);
  return id;
}

std::string value_text(uint64_t v, int width, const std::string& id) {
  if (width == 1) return std::string(1, (v & 1) ? '1' : '0') + id;
  std::string bits = "b";
  for (int b = width - 1; b >= 0; --b) bits += ((v >> b) & 1) ? '1' : '0';
  return bits + " " + id;
}

[[noreturn]] void malformed(const std::string& msg) {
  throw Error(Errc::kMalformedVcd, "malformed VCD: " + msg);
}

}  // namespace

std::string export_vcd(const Trace& trace, const DesignSignature& signature) {
  std::string out;
  out += "$version hwut " HWUT_VERSION " $end\n";
  out += "$comment sampling " + trace.discipline + " $end\n";
  out += "$timescale 1ns $end\n";
  out += "$scope module " + signature.module + " $end\n";
  for (size_t i = 0; i < trace.signals.size(); ++i) {
    const TraceSignal& s = trace.signals[i];
    out += "$var wire " + std::to_string(s.width) + " " + vcd_id(i) + " " + s.name;
    if (s.width > 1) out += " [" + std::to_string(s.width - 1) + ":0]";
    out += " $end\n";
  }
  out += "$upscope $end\n$enddefinitions $end\n";
  for (size_t n = 0; n < trace.cycles; ++n) {
    out += "#" + std::to_string(n) + "\n";
    if (n == 0) out += "$dumpvars\n";
    for (size_t i = 0; i < trace.signals.size(); ++i) {
      const TraceSignal& s = trace.signals[i];
      if (n > 0 && s.values[n] == s.values[n - 1]) continue;
      out += value_text(s.values[n], s.width, vcd_id(i)) + "\n";
    }
    if (n == 0) out += "$end\n";
  }
  return out;
}

Trace read_vcd(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string tok;
  Trace trace;
  trace.discipline.clear();
  std::map<std::string, size_t> by_id;
  std::vector<uint64_t> current;
  long long time = -1;
  bool definitions_done = false;

  auto skip_to_end = [&](std::string* collected) {
    std::string t;
    while (in >> t) {
      if (t == "$end") return;
      if (collected) *collected += (collected->empty() ? "" : " ") + t;
    }
    malformed("unterminated section");
  };
  auto flush_until = [&](long long next) {
    // Cycles between the previous and the next timestamp hold their values.
    while (static_cast<long long>(trace.cycles) < next) {
      for (size_t i = 0; i < trace.signals.size(); ++i) {
        trace.signals[i].values.push_back(current[i]);
      }
      ++trace.cycles;
    }
  };
  auto set_value = [&](const std::string& bits, const std::string& id) {
    auto it = by_id.find(id);
    if (it == by_id.end()) malformed("unknown identifier '" + id + "'");
    if (time < 0) malformed("value change before the first timestamp");
    uint64_t v = 0;
    for (char c : bits) {
      if (c != '0' && c != '1') malformed("non-binary value '" + bits + "'");
      v = (v << 1) | static_cast<uint64_t>(c - '0');
    }
    if (bits.size() > 64) malformed("value wider than 64 bits");
    current[it->second] = v & width_mask(trace.signals[it->second].width);
  };

  while (in >> tok) {
    if (!definitions_done) {
      if (tok == "$var") {
        std::string type, width, id, name;
        if (!(in >> type >> width >> id >> name)) malformed("truncated $var");
        std::string rest;
        skip_to_end(&rest);
        int w = 0;
        try {
          w = std::stoi(width);
        } catch (const std::exception&) {
          malformed("bad width '" + width + "'");
        }
        if (w < 1 || w > 64) malformed("unsupported width " + width);
        if (by_id.contains(id)) malformed("duplicate identifier '" + id + "'");
        by_id[id] = trace.signals.size();
        trace.signals.push_back({name, w, {}});
      } else if (tok == "$comment") {
        std::string body;
        skip_to_end(&body);
        constexpr std::string_view kKey = "sampling ";
        if (body.rfind(kKey, 0) == 0) trace.discipline = body.substr(kKey.size());
      } else if (tok == "$enddefinitions") {
        skip_to_end(nullptr);
        definitions_done = true;
        current.assign(trace.signals.size(), 0);
      } else if (!tok.empty() && tok[0] == '$') {
        skip_to_end(nullptr);
      } else {
        malformed("unexpected token '" + tok + "' in header");
      }
      continue;
    }
    if (tok[0] == '#') {
      long long t = 0;
      try {
        t = std::stoll(tok.substr(1));
      } catch (const std::exception&) {
        malformed("bad timestamp '" + tok + "'");
      }
      if (t <= time) malformed("timestamps must increase");
      if (time >= 0) flush_until(t);
      time = t;
    } else if (tok == "$dumpvars" || tok == "$end" || tok == "$dumpall") {
      continue;
    } else if (tok[0] == 'b' || tok[0] == 'B') {
      std::string id;
      if (!(in >> id)) malformed("vector value without identifier");
      set_value(tok.substr(1), id);
    } else if (tok[0] == '0' || tok[0] == '1') {
      set_value(tok.substr(0, 1), tok.substr(1));
    } else {
      malformed("unexpected token '" + tok + "'");
    }
  }
  if (!definitions_done) malformed("missing $enddefinitions");
  if (time >= 0) flush_until(time + 1);
  if (trace.discipline.empty()) trace.discipline = Trace::kDiscipline;
  return trace;
}

}  // namespace hwut
