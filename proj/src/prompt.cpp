#include "hwut/prompt.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hwut/error.hpp"

namespace hwut {

std::string_view strategy_name(Strategy s) {
  return s == Strategy::kNls ? "nls" : "nlsc";
}

Strategy parse_strategy(std::string_view text) {
  std::string t(text);
  std::transform(t.begin(), t.end(), t.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (t == "nls") return Strategy::kNls;
  if (t == "nlsc") return Strategy::kNlsc;
  throw Error(Errc::kInvalidArgument, "unknown strategy '" + std::string(text) + "'");
}

GenConfig GenConfig::make(Strategy strategy, int shots) {
  GenConfig c;
  c.strategy = strategy;
  c.shots = shots;
  c.max_output_tokens = strategy == Strategy::kNlsc ? 2048 : 512;
  c.validate();
  return c;
}

void GenConfig::validate() const {
  if (shots != 0 && shots != 5) {
    throw Error(Errc::kInvalidArgument, "shots must be 0 or 5");
  }
  if (max_input_tokens <= 0 || max_output_tokens <= 0) {
    throw Error(Errc::kInvalidArgument, "token limits must be positive");
  }
  if (!(temperature >= 0.0)) {
    throw Error(Errc::kInvalidArgument, "temperature must be non-negative");
  }
}

std::string GenConfig::label() const {
  return std::string(strategy == Strategy::kNls ? "NLS" : "NLSC") + "@" +
         std::to_string(shots);
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& dir) {
  auto read = [&](const char* name) {
    std::ifstream in(dir / name, std::ios::binary);
    if (!in) {
      throw Error(Errc::kIoError, "cannot read prompt template " + (dir / name).string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  return {read("testgen.txt"), read("debug.txt")};
}

std::string render_template(std::string_view tmpl,
                            const std::map<std::string, std::string>& values) {
  auto lookup = [&](const std::string& key) -> const std::string* {
    auto it = values.find(key);
    return it == values.end() ? nullptr : &it->second;
  };
  std::string out;
  size_t pos = 0;
  while (pos < tmpl.size()) {
    const size_t open = tmpl.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    out.append(tmpl.substr(pos, open - pos));
    const size_t close = tmpl.find("}}", open);
    if (close == std::string_view::npos) {
      throw Error(Errc::kInvalidArgument, "unterminated template marker");
    }
    const std::string tag(tmpl.substr(open + 2, close - open - 2));
    pos = close + 2;
    if (!tag.empty() && tag[0] == '#') {
      const std::string name = tag.substr(1);
      const std::string end_tag = "{{/" + name + "}}";
      const size_t end = tmpl.find(end_tag, pos);
      if (end == std::string_view::npos) {
        throw Error(Errc::kInvalidArgument, "section '" + name + "' is not closed");
      }
      const std::string* v = lookup(name);
      if (v && !v->empty()) out += render_template(tmpl.substr(pos, end - pos), values);
      pos = end + end_tag.size();
      // A section marker alone on its line leaves no blank line behind.
      if (pos < tmpl.size() && tmpl[pos] == '\n' && (out.empty() || out.back() == '\n')) {
        ++pos;
      }
    } else if (!tag.empty() && tag[0] == '/') {
      throw Error(Errc::kInvalidArgument, "unexpected closing marker '" + tag + "'");
    } else {
      if (const std::string* v = lookup(tag)) out += *v;
    }
  }
  return out;
}

int estimate_tokens(std::string_view text) {
  long long words = 0;
  bool in_word = false;
  for (char c : text) {
    const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!space && !in_word) ++words;
    in_word = !space;
  }
  return static_cast<int>((words * 13 + 9) / 10);
}

std::string stimulus_header(const DesignSignature& signature) {
  UnitTest t;
  t.inputs = signature.stimulus_inputs();
  std::string h = format_stimulus(t);
  if (!h.empty() && h.back() == '\n') h.pop_back();
  return h;
}

namespace {

std::string strip_trailing_newline(std::string s) {
  while (!s.empty() && s.back() == '\n') s.pop_back();
  return s;
}

std::string signature_block(const DesignSignature& sig) {
  std::string s = strip_trailing_newline(sig.to_text());
  if (sig.clock) {
    s += "\nThe harness drives " + *sig.clock +
         " itself: one rising edge per stimulus row. Do not list it as a column.";
  }
  return s;
}

void check_window(const std::string& prompt, const GenConfig& cfg) {
  const int tokens = estimate_tokens(prompt);
  if (tokens > cfg.max_input_tokens) {
    throw Error(Errc::kPromptOverflow, "prompt needs about " + std::to_string(tokens) +
                                           " tokens, window is " +
                                           std::to_string(cfg.max_input_tokens));
  }
}

std::string bit_literal(uint64_t v, int width) {
  std::string bits;
  for (int b = width - 1; b >= 0; --b) bits += ((v >> b) & 1) ? '1' : '0';
  return std::to_string(width) + "'b" + bits;
}

}  // namespace

std::string build_testgen_prompt(const PromptTemplates& templates, const GenConfig& cfg,
                                 const ProblemSpec& spec,
                                 const std::optional<DesignSource>& buggy,
                                 const std::optional<TestGenFeedback>& feedback) {
  cfg.validate();
  if (cfg.strategy == Strategy::kNlsc && !buggy) {
    throw Error(Errc::kInvalidArgument, "NLSC prompts need the design source");
  }
  if (cfg.strategy == Strategy::kNls && buggy) {
    throw Error(Errc::kInvalidArgument, "NLS prompts must not include the design source");
  }
  if (spec.description.empty()) {
    throw Error(Errc::kInvalidArgument, "problem '" + spec.id + "' has no description");
  }
  if (static_cast<int>(spec.exemplars.size()) < cfg.shots) {
    throw Error(Errc::kInvalidArgument,
                "problem '" + spec.id + "' has " + std::to_string(spec.exemplars.size()) +
                    " exemplars, " + std::to_string(cfg.shots) + " shots requested");
  }

  std::map<std::string, std::string> v;
  v["description"] = strip_trailing_newline(spec.description);
  v["signature"] = signature_block(spec.signature);
  v["header"] = stimulus_header(spec.signature);
  if (buggy) v["buggy"] = strip_trailing_newline(buggy->text);

  std::string shots;
  for (int i = 0; i < cfg.shots; ++i) {
    const Exemplar& e = spec.exemplars[static_cast<size_t>(i)];
    shots += "### Example " + std::to_string(i + 1) + "\nTask: " +
             strip_trailing_newline(e.description) + "\nSignature:\n" +
             strip_trailing_newline(e.signature) + "\nUnit test:\n```\n" +
             strip_trailing_newline(e.unit_test) + "\n```\n";
    if (i + 1 < cfg.shots) shots += "\n";
  }
  v["exemplars"] = strip_trailing_newline(shots);

  if (feedback) {
    char buf[160];
    const CoverageReport& c = feedback->coverage;
    std::snprintf(buf, sizeof buf,
                  "line %d/%d, branch %d/%d, toggle %d/%d, fsm %d/%d, scalar %.4f",
                  c.line.covered, c.line.total, c.branch.covered, c.branch.total,
                  c.toggle.covered, c.toggle.total, c.fsm.covered, c.fsm.total,
                  c.scalar());
    v["coverage"] = buf;
    std::string items;
    for (const std::string& u : c.uncovered) items += "- " + u + "\n";
    v["uncovered"] = items.empty() ? "- (none)" : strip_trailing_newline(items);
    v["previous"] = strip_trailing_newline(format_stimulus(feedback->previous));
    v["feedback"] = "yes";
  }

  std::string prompt = render_template(templates.testgen, v);
  check_window(prompt, cfg);
  return prompt;
}

std::string build_debug_prompt(const PromptTemplates& templates, const GenConfig& cfg,
                               const ProblemSpec& spec, const DesignSource& buggy,
                               const UnitTest& failing, const MismatchSummary& summary) {
  if (summary.total == 0) {
    throw Error(Errc::kInvalidArgument, "debug prompt needs a failing mismatch summary");
  }
  std::map<std::string, std::string> v;
  v["description"] = strip_trailing_newline(spec.description);
  v["signature"] = signature_block(spec.signature);
  v["buggy"] = strip_trailing_newline(buggy.text);
  v["test_id"] = failing.id;
  v["stimulus"] = strip_trailing_newline(format_stimulus(failing));
  v["mismatch_count"] = std::to_string(summary.total);
  v["shown_count"] = std::to_string(summary.entries.size());
  if (summary.truncated()) {
    v["truncated"] = "Showing the first " + std::to_string(summary.entries.size()) +
                     " of " + std::to_string(summary.total) + " mismatches.";
  }
  std::string rows;
  for (const MismatchEntry& e : summary.entries) {
    rows += "| " + std::to_string(e.cycle) + " | " + e.output + " | " +
            bit_literal(e.expected, e.width) + " | " + bit_literal(e.actual, e.width) + " |\n";
  }
  v["mismatches"] = strip_trailing_newline(rows);
  std::string prompt = render_template(templates.debug, v);
  check_window(prompt, cfg);
  return prompt;
}

}  // namespace hwut
