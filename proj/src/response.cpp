#include "hwut/response.hpp"

#include <cctype>
#include <optional>
#include <vector>

#include "hwut/error.hpp"
#include "hwut/parser.hpp"

namespace hwut {
namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  size_t pos = 0;
  while (pos <= text.size()) {
    const size_t nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return lines;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_fence(std::string_view line) { return trim(line).substr(0, 3) == "```"; }

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

// [first, last) line ranges of fenced block bodies. An unclosed fence runs to
// the end of the text.
std::vector<std::pair<size_t, size_t>> fenced_blocks(const std::vector<std::string_view>& lines) {
  std::vector<std::pair<size_t, size_t>> blocks;
  for (size_t i = 0; i < lines.size(); ++i) {
    if (!is_fence(lines[i])) continue;
    size_t j = i + 1;
    while (j < lines.size() && !is_fence(lines[j])) ++j;
    blocks.emplace_back(i + 1, j);
    i = j;
  }
  return blocks;
}

// A stimulus row: tokens of digits/underscores, optional trailing comment.
bool looks_like_row(std::string_view line) {
  if (size_t hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
  line = trim(line);
  if (line.empty()) return true;
  for (char c : line) {
    if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '_' || c == ' ' || c == '\t')) {
      return false;
    }
  }
  return true;
}

std::string join(const std::vector<std::string_view>& lines, size_t first, size_t last) {
  std::string out;
  for (size_t i = first; i < last; ++i) {
    out.append(lines[i]);
    out += '\n';
  }
  return out;
}

}  // namespace

UnitTest parse_unit_test(std::string_view response, const DesignSignature& signature,
                         std::string id) {
  const auto lines = split_lines(response);
  std::optional<std::pair<size_t, size_t>> range;  // header line .. end

  for (const auto& [first, last] : fenced_blocks(lines)) {
    for (size_t i = first; i < last; ++i) {
      if (starts_with(trim(lines[i]), "inputs:")) {
        range.emplace(i, last);
        break;
      }
    }
    if (range) break;
  }
  if (!range) {
    for (size_t i = 0; i < lines.size() && !range; ++i) {
      if (!starts_with(trim(lines[i]), "inputs:")) continue;
      size_t j = i + 1;
      while (j < lines.size() && !is_fence(lines[j]) && looks_like_row(lines[j])) ++j;
      range.emplace(i, j);
    }
  }
  if (!range) throw Error(Errc::kNoStimulusFound, "response contains no 'inputs:' block");

  const int offset = static_cast<int>(range->first);
  UnitTest test;
  try {
    test = parse_stimulus(join(lines, range->first, range->second), std::move(id));
  } catch (const Error& e) {
    // Re-anchor the diagnostic to the response text.
    const int line = e.line() + offset;
    std::string msg = e.what();
    if (starts_with(msg, "line ")) msg = msg.substr(msg.find(": ") + 2);
    throw Error(Errc::kMalformedStimulus, "line " + std::to_string(line) + ": " + msg, line, 1);
  }

  const int header_line = offset + 1;
  const std::vector<PortInfo> want = signature.stimulus_inputs();
  auto render = [](const std::vector<PortInfo>& cols) {
    std::string s;
    for (const PortInfo& p : cols) {
      s += (s.empty() ? "" : ", ") + p.name + "[" + std::to_string(p.width) + "]";
    }
    return s;
  };
  if (test.inputs != want) {
    throw Error(Errc::kMalformedStimulus,
                "line " + std::to_string(header_line) + ": columns '" + render(test.inputs) +
                    "' do not match the signature order '" + render(want) + "'",
                header_line, 1);
  }
  return test;
}

DesignSource parse_patch(std::string_view response, const DesignSignature& expected,
                         const SignatureOverrides& overrides) {
  const auto lines = split_lines(response);

  auto find_module = [&](size_t first, size_t last) -> std::optional<std::string> {
    for (size_t i = first; i < last; ++i) {
      const std::string_view t = trim(lines[i]);
      if (!(t == "module" || starts_with(t, "module ") || starts_with(t, "module\t"))) continue;
      for (size_t j = i; j < last; ++j) {
        const std::string_view u = trim(lines[j]);
        if (u.find("endmodule") != std::string_view::npos) {
          return join(lines, i, j + 1);
        }
      }
      return std::nullopt;
    }
    return std::nullopt;
  };

  std::optional<std::string> text;
  for (const auto& [first, last] : fenced_blocks(lines)) {
    if ((text = find_module(first, last))) break;
  }
  if (!text) text = find_module(0, lines.size());
  if (!text) throw Error(Errc::kNoModuleFound, "response contains no module ... endmodule");

  DesignSource source = DesignSource::patched(*text);
  ElaboratedDesign design;
  try {
    design = elaborate(parse_design(source), source);
  } catch (const Error& e) {
    const bool syntax = e.code() == Errc::kSyntaxError ||
                        e.code() == Errc::kUnsupportedConstruct;
    throw Error(Errc::kPatchRejected,
                std::string(syntax ? "parse: " : "elaborate: ") + e.diagnostic("patch"),
                e.line(), e.column());
  }
  DesignSignature got;
  try {
    got = extract_signature(design, overrides);
  } catch (const Error& e) {
    throw Error(Errc::kPatchRejected, std::string("signature: ") + e.what());
  }
  if (!(got == expected)) {
    std::string why = "ports or clocking differ from the original";
    if (got.module != expected.module) {
      why = "module renamed to '" + got.module + "'";
    } else if (got.inputs != expected.inputs) {
      why = "input ports differ";
    } else if (got.outputs != expected.outputs) {
      why = "output ports differ";
    } else if (got.clock != expected.clock) {
      why = "clock differs";
    } else if (got.reset != expected.reset) {
      why = "reset differs";
    }
    throw Error(Errc::kPatchRejected, "signature: " + why);
  }
  return source;
}

}  // namespace hwut
