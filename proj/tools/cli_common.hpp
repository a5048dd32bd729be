#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "resodrive/config.hpp"
#include "resodrive/errors.hpp"
#include "resodrive/format.hpp"

// Shared plumbing for the subcommands: config/output handling, the
// exit-code contract, and deterministic file emission.
//
// Exit codes: 0 success, 1 unexpected failure, 2 unreadable input
// (config/netlist/flags), 3 domain violation (including under-resolved
// resonance bands), 4 singular circuit system, 5 Monte-Carlo failure rate
// exceeded, 6 boundary-element self-check failure.

namespace resodrive::cli {

using ordered_json = nlohmann::ordered_json;

struct CommonOptions {
  std::string config_path;
  std::string out_dir;  // empty -> config output_dir -> "."
};

inline config::RunConfig load_config(const CommonOptions& opts) {
  if (opts.config_path.empty())
    throw InputError("this command needs --config <file>");
  return config::load(opts.config_path);
}

inline std::filesystem::path resolve_out_dir(const CommonOptions& opts,
                                             const config::RunConfig* cfg) {
  std::filesystem::path dir =
      !opts.out_dir.empty() ? opts.out_dir
                            : (cfg ? cfg->output_dir : std::string("."));
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec && !std::filesystem::is_directory(dir))
    throw InputError("cannot create output directory " + dir.string() + ": " +
                     ec.message());
  return dir;
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  out << content;
  if (!out.good()) throw InputError("failed writing " + path.string());
  std::fprintf(stderr, "wrote %s\n", path.string().c_str());
}

inline void write_json_file(const std::filesystem::path& path,
                            const ordered_json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

// Worker threads: RESODRIVE_THREADS wins, 0 means hardware concurrency.
inline int env_threads() {
  const char* env = std::getenv("RESODRIVE_THREADS");
  if (!env || !*env) return 0;
  char* end = nullptr;
  long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 0)
    throw InputError(std::string("RESODRIVE_THREADS must be a non-negative "
                                 "integer, got \"") +
                     env + "\"");
  return static_cast<int>(v);
}

// Human-facing value with SI prefix, deterministic.
inline std::string format_engineering(double v, const std::string& unit) {
  struct Prefix { double scale; const char* name; };
  static const Prefix table[] = {{1e9, "G"},  {1e6, "M"},  {1e3, "k"},
                                 {1.0, ""},   {1e-3, "m"}, {1e-6, "u"},
                                 {1e-9, "n"}, {1e-12, "p"}, {1e-15, "f"}};
  if (v == 0.0) return "0 " + unit;
  const double mag = std::abs(v);
  for (const auto& p : table)
    if (mag >= p.scale * 0.9999999999)
      return format_fixed(v / p.scale, 4) + " " + p.name + unit;
  return format_fixed(v, 4) + " " + unit;
}

}  // namespace resodrive::cli
