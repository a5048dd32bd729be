#include "resodrive/netlist.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "resodrive/format.hpp"

namespace resodrive::netlist {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string canonical_node(std::string_view raw) {
  if (is_ground(raw)) return "0";
  return std::string(raw);
}

struct LogicalLine {
  std::string text;
  int line = 0;
};

std::vector<LogicalLine> logical_lines(std::string_view text,
                                       std::vector<Diagnostic>& diags) {
  std::vector<LogicalLine> out;
  int lineno = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    std::string_view raw = (nl == std::string_view::npos)
                               ? text.substr(pos)
                               : text.substr(pos, nl - pos);
    ++lineno;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    std::string_view t = trim(raw);
    if (!t.empty() && t.front() == '*') {
      // comment
    } else if (!t.empty() && t.front() == '+') {
      if (out.empty()) {
        diags.push_back({Diagnostic::Severity::Error, lineno,
                         "continuation '+' with no preceding statement"});
      } else {
        out.back().text += ' ';
        out.back().text += std::string(t.substr(1));
      }
    } else if (!t.empty()) {
      out.push_back({std::string(t), lineno});
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return out;
}

std::optional<int> parse_int(std::string_view tok) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) return std::nullopt;
  return v;
}

void err(std::vector<Diagnostic>& d, int line, std::string msg) {
  d.push_back({Diagnostic::Severity::Error, line, std::move(msg)});
}

}  // namespace

bool is_ground(std::string_view node) {
  if (node == "0") return true;
  return node.size() == 3 && lower(node) == "gnd";
}

std::optional<double> parse_value(std::string_view token) {
  token = trim(token);
  if (token.empty()) return std::nullopt;
  double mantissa = 0.0;
  auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), mantissa);
  if (ec != std::errc() || ptr == token.data()) return std::nullopt;
  if (!std::isfinite(mantissa)) return std::nullopt;
  std::string suffix = lower(std::string_view(ptr, token.data() + token.size() - ptr));
  double scale = 1.0;
  if (suffix.empty())
    scale = 1.0;
  else if (suffix == "f")
    scale = 1e-15;
  else if (suffix == "p")
    scale = 1e-12;
  else if (suffix == "n")
    scale = 1e-9;
  else if (suffix == "u")
    scale = 1e-6;
  else if (suffix == "m")
    scale = 1e-3;
  else if (suffix == "k")
    scale = 1e3;
  else if (suffix == "meg")
    scale = 1e6;
  else if (suffix == "g")
    scale = 1e9;
  else
    return std::nullopt;
  return mantissa * scale;
}

const Component* Netlist::find_component(std::string_view name) const {
  std::string want = lower(name);
  for (const auto& c : components)
    if (lower(c.name) == want) return &c;
  return nullptr;
}

const AcSource* Netlist::find_source(std::string_view name) const {
  std::string want = lower(name);
  for (const auto& s : sources)
    if (lower(s.name) == want) return &s;
  return nullptr;
}

std::vector<std::string> Netlist::node_names() const {
  std::set<std::string> nodes;
  for (const auto& c : components) {
    if (!is_ground(c.node_a)) nodes.insert(c.node_a);
    if (!is_ground(c.node_b)) nodes.insert(c.node_b);
  }
  for (const auto& s : sources) {
    if (!is_ground(s.node_plus)) nodes.insert(s.node_plus);
    if (!is_ground(s.node_minus)) nodes.insert(s.node_minus);
  }
  return {nodes.begin(), nodes.end()};
}

bool Netlist::has_node(std::string_view name) const {
  if (is_ground(name)) return true;
  auto nodes = node_names();
  return std::find(nodes.begin(), nodes.end(), std::string(name)) !=
         nodes.end();
}

ParseResult parse(std::string_view text) {
  ParseResult result;
  Netlist n;
  auto& diags = result.diagnostics;
  bool saw_end = false;

  for (const auto& ll : logical_lines(text, diags)) {
    if (saw_end) break;
    auto toks = split_ws(ll.text);
    if (toks.empty()) continue;
    const std::string head = lower(toks[0]);

    if (head[0] == '.') {
      if (head == ".end") {
        saw_end = true;
      } else if (head == ".title") {
        auto rest = trim(std::string_view(ll.text).substr(6));
        n.title = std::string(rest);
      } else if (head == ".ac") {
        if (toks.size() != 5) {
          err(diags, ll.line, ".ac expects: .ac lin|dec N f_start f_stop");
          continue;
        }
        SweepSpec sw;
        std::string scale = lower(toks[1]);
        if (scale == "lin")
          sw.scale = SweepScale::Linear;
        else if (scale == "dec")
          sw.scale = SweepScale::Decade;
        else {
          err(diags, ll.line, ".ac scale must be 'lin' or 'dec', got '" +
                                  toks[1] + "'");
          continue;
        }
        auto npts = parse_int(toks[2]);
        auto f1 = parse_value(toks[3]);
        auto f2 = parse_value(toks[4]);
        if (!npts || !f1 || !f2) {
          err(diags, ll.line, ".ac has a malformed number");
          continue;
        }
        sw.points = *npts;
        sw.f_start = *f1;
        sw.f_stop = *f2;
        if (n.sweep) {
          err(diags, ll.line, "duplicate .ac directive");
          continue;
        }
        n.sweep = sw;
      } else if (head == ".port") {
        if (toks.size() != 3) {
          err(diags, ll.line, ".port expects: .port Vname Z0");
          continue;
        }
        auto z0 = parse_value(toks[2]);
        if (!z0) {
          err(diags, ll.line, ".port reference impedance is malformed");
          continue;
        }
        n.ports.push_back({toks[1], *z0, ll.line});
      } else if (head == ".probe") {
        if (toks.size() < 2) {
          err(diags, ll.line, ".probe expects at least one v(node)");
          continue;
        }
        for (size_t i = 1; i < toks.size(); ++i) {
          const std::string& t = toks[i];
          if (t.size() < 4 || lower(t.substr(0, 2)) != "v(" ||
              t.back() != ')') {
            err(diags, ll.line, ".probe entries must look like v(node), got '" +
                                    t + "'");
            continue;
          }
          n.probes.push_back(canonical_node(t.substr(2, t.size() - 3)));
        }
      } else {
        err(diags, ll.line, "unknown directive '" + toks[0] + "'");
      }
      continue;
    }

    const char kind_char = static_cast<char>(std::tolower(
        static_cast<unsigned char>(toks[0][0])));
    switch (kind_char) {
      case 'r':
      case 'l':
      case 'c': {
        if (toks.size() != 4) {
          err(diags, ll.line,
              "element '" + toks[0] + "' expects: name node_a node_b value");
          break;
        }
        auto v = parse_value(toks[3]);
        if (!v) {
          err(diags, ll.line,
              "malformed value '" + toks[3] + "' for '" + toks[0] + "'");
          break;
        }
        Component c;
        c.kind = kind_char == 'r'   ? ComponentKind::Resistor
                 : kind_char == 'l' ? ComponentKind::Inductor
                                    : ComponentKind::Capacitor;
        c.name = toks[0];
        c.node_a = canonical_node(toks[1]);
        c.node_b = canonical_node(toks[2]);
        c.value = *v;
        c.line = ll.line;
        n.components.push_back(std::move(c));
        break;
      }
      case 'v': {
        if (toks.size() != 5 && toks.size() != 6) {
          err(diags, ll.line,
              "source '" + toks[0] +
                  "' expects: name node+ node- AC amplitude [phase_deg]");
          break;
        }
        if (lower(toks[3]) != "ac") {
          err(diags, ll.line,
              "source '" + toks[0] + "' supports only AC, got '" + toks[3] +
                  "'");
          break;
        }
        auto amp = parse_value(toks[4]);
        std::optional<double> ph = 0.0;
        if (toks.size() == 6) ph = parse_value(toks[5]);
        if (!amp || !ph) {
          err(diags, ll.line, "malformed number on source '" + toks[0] + "'");
          break;
        }
        AcSource s;
        s.name = toks[0];
        s.node_plus = canonical_node(toks[1]);
        s.node_minus = canonical_node(toks[2]);
        s.amplitude = *amp;
        s.phase_deg = *ph;
        s.line = ll.line;
        n.sources.push_back(std::move(s));
        break;
      }
      case 'k': {
        if (toks.size() != 4) {
          err(diags, ll.line,
              "coupling '" + toks[0] + "' expects: name Lname1 Lname2 k");
          break;
        }
        auto k = parse_value(toks[3]);
        if (!k) {
          err(diags, ll.line, "malformed k on '" + toks[0] + "'");
          break;
        }
        n.couplings.push_back({toks[0], toks[1], toks[2], *k, ll.line});
        break;
      }
      default:
        err(diags, ll.line, "unrecognized statement '" + toks[0] + "'");
    }
  }

  auto vd = validate(n);
  diags.insert(diags.end(), vd.begin(), vd.end());
  bool has_error = std::any_of(diags.begin(), diags.end(), [](const auto& d) {
    return d.severity == Diagnostic::Severity::Error;
  });
  if (!has_error) result.netlist = std::move(n);
  return result;
}

std::vector<Diagnostic> validate(const Netlist& n) {
  std::vector<Diagnostic> diags;

  if (n.components.empty() && n.sources.empty()) {
    err(diags, 0, "netlist has no elements");
    return diags;
  }

  // Duplicate names (case-insensitive, across all element kinds).
  std::map<std::string, int> seen;
  auto check_name = [&](const std::string& name, int line) {
    auto key = lower(name);
    auto [it, inserted] = seen.emplace(key, line);
    if (!inserted)
      err(diags, line,
          "duplicate element name '" + name + "' (first used on line " +
              std::to_string(it->second) + ")");
  };
  for (const auto& c : n.components) check_name(c.name, c.line);
  for (const auto& s : n.sources) check_name(s.name, s.line);
  for (const auto& k : n.couplings) check_name(k.name, k.line);

  // Element values.
  for (const auto& c : n.components) {
    if (!(c.value > 0.0) || !std::isfinite(c.value))
      err(diags, c.line,
          "element '" + c.name + "' must have a positive finite value");
    if (c.node_a == c.node_b)
      err(diags, c.line,
          "element '" + c.name + "' has both terminals on node '" + c.node_a +
              "'");
  }
  for (const auto& s : n.sources) {
    if (s.amplitude < 0.0 || !std::isfinite(s.amplitude))
      err(diags, s.line,
          "source '" + s.name + "' amplitude must be non-negative");
    if (s.node_plus == s.node_minus)
      err(diags, s.line, "source '" + s.name + "' is shorted to itself");
  }

  // Couplings reference existing, distinct inductors; one coupling per pair.
  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& k : n.couplings) {
    const Component* a = n.find_component(k.inductor_a);
    const Component* b = n.find_component(k.inductor_b);
    if (!a || a->kind != ComponentKind::Inductor)
      err(diags, k.line,
          "coupling '" + k.name + "' references unknown inductor '" +
              k.inductor_a + "'");
    if (!b || b->kind != ComponentKind::Inductor)
      err(diags, k.line,
          "coupling '" + k.name + "' references unknown inductor '" +
              k.inductor_b + "'");
    if (a && b && a == b)
      err(diags, k.line,
          "coupling '" + k.name + "' couples inductor '" + a->name +
              "' to itself");
    if (!(std::abs(k.k) > 0.0) || std::abs(k.k) >= 1.0 ||
        !std::isfinite(k.k))
      err(diags, k.line,
          "coupling '" + k.name + "' needs 0 < |k| < 1, got " +
              format_double(k.k));
    if (a && b) {
      auto key = std::minmax(lower(a->name), lower(b->name));
      if (!pairs.insert({key.first, key.second}).second)
        err(diags, k.line,
            "duplicate coupling between '" + a->name + "' and '" + b->name +
                "'");
    }
  }

  // Sweep sanity.
  if (n.sweep) {
    const auto& s = *n.sweep;
    if (s.scale == SweepScale::Linear && s.points < 2)
      err(diags, 0, ".ac lin needs at least 2 points");
    if (s.scale == SweepScale::Decade && s.points < 1)
      err(diags, 0, ".ac dec needs at least 1 point per decade");
    if (!(s.f_start > 0.0) || !(s.f_stop > s.f_start))
      err(diags, 0, ".ac needs 0 < f_start < f_stop");
  }

  // Ports reference AC sources, distinct, positive Z0.
  std::set<std::string> port_sources;
  for (const auto& p : n.ports) {
    if (!n.find_source(p.source_name))
      err(diags, p.line,
          ".port references unknown source '" + p.source_name + "'");
    if (!(p.reference_impedance > 0.0))
      err(diags, p.line, ".port reference impedance must be positive");
    if (!port_sources.insert(lower(p.source_name)).second)
      err(diags, p.line,
          "duplicate .port for source '" + p.source_name + "'");
  }

  // Probes reference existing nodes.
  for (const auto& pn : n.probes) {
    if (!n.has_node(pn))
      err(diags, 0, ".probe references unknown node '" + pn + "'");
  }

  // Connectivity: every node must reach ground through elements.
  std::set<std::string> nodes;
  bool touches_ground = false;
  std::multimap<std::string, std::string> edges;
  auto add_edge = [&](const std::string& a, const std::string& b) {
    std::string ca = is_ground(a) ? "0" : a;
    std::string cb = is_ground(b) ? "0" : b;
    if (ca == "0" || cb == "0") touches_ground = true;
    if (ca != "0") nodes.insert(ca);
    if (cb != "0") nodes.insert(cb);
    edges.insert({ca, cb});
    edges.insert({cb, ca});
  };
  for (const auto& c : n.components) add_edge(c.node_a, c.node_b);
  for (const auto& s : n.sources) add_edge(s.node_plus, s.node_minus);

  if (!touches_ground) {
    err(diags, 0, "no element is connected to ground (node 0)");
  } else {
    std::set<std::string> reached;
    std::vector<std::string> stack{"0"};
    while (!stack.empty()) {
      std::string cur = stack.back();
      stack.pop_back();
      auto [lo, hi] = edges.equal_range(cur);
      for (auto it = lo; it != hi; ++it) {
        if (it->second != "0" && reached.insert(it->second).second)
          stack.push_back(it->second);
      }
    }
    std::vector<std::string> isolated;
    for (const auto& node : nodes)
      if (!reached.count(node)) isolated.push_back(node);
    if (!isolated.empty()) {
      std::string list;
      for (size_t i = 0; i < isolated.size(); ++i) {
        if (i) list += ", ";
        list += isolated[i];
      }
      err(diags, 0,
          "nodes not connected to ground through any element: " + list);
    }
  }

  return diags;
}

std::string serialize(const Netlist& n) {
  std::string out;
  auto emit = [&out](const std::string& s) {
    out += s;
    out += '\n';
  };
  if (!n.title.empty()) emit(".title " + n.title);
  for (const auto& c : n.components)
    emit(c.name + " " + c.node_a + " " + c.node_b + " " +
         format_double(c.value));
  for (const auto& s : n.sources) {
    std::string line = s.name + " " + s.node_plus + " " + s.node_minus +
                       " AC " + format_double(s.amplitude);
    if (s.phase_deg != 0.0) line += " " + format_double(s.phase_deg);
    emit(line);
  }
  for (const auto& k : n.couplings)
    emit(k.name + " " + k.inductor_a + " " + k.inductor_b + " " +
         format_double(k.k));
  if (n.sweep) {
    const auto& s = *n.sweep;
    emit(std::string(".ac ") +
         (s.scale == SweepScale::Linear ? "lin " : "dec ") +
         std::to_string(s.points) + " " + format_double(s.f_start) + " " +
         format_double(s.f_stop));
  }
  for (const auto& p : n.ports)
    emit(".port " + p.source_name + " " + format_double(p.reference_impedance));
  if (!n.probes.empty()) {
    std::string line = ".probe";
    for (const auto& pn : n.probes) line += " v(" + pn + ")";
    emit(line);
  }
  emit(".end");
  return out;
}

std::vector<double> sweep_frequencies(const SweepSpec& s) {
  std::vector<double> f;
  if (s.scale == SweepScale::Linear) {
    f.reserve(static_cast<size_t>(s.points));
    for (int i = 0; i < s.points; ++i) {
      double t = static_cast<double>(i) / static_cast<double>(s.points - 1);
      f.push_back(s.f_start + (s.f_stop - s.f_start) * t);
    }
    f.back() = s.f_stop;
  } else {
    double decades = std::log10(s.f_stop / s.f_start);
    int segments = static_cast<int>(
        std::ceil(static_cast<double>(s.points) * decades - 1e-9));
    segments = std::max(segments, 1);
    f.reserve(static_cast<size_t>(segments) + 1);
    for (int i = 0; i <= segments; ++i) {
      double expo = decades * static_cast<double>(i) /
                    static_cast<double>(segments);
      f.push_back(s.f_start * std::pow(10.0, expo));
    }
    f.back() = s.f_stop;
  }
  return f;
}

}  // namespace resodrive::netlist
