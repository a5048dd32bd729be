#pragma once

namespace CLI {
class App;
}

namespace resodrive::cli {

void register_params(CLI::App& app);
void register_ac(CLI::App& app);
void register_mc(CLI::App& app);
void register_trap(CLI::App& app);

}  // namespace resodrive::cli
