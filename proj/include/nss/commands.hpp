#pragma once

#include <iosfwd>

#include "nss/config.hpp"
#include "nss/potential.hpp"
#include "nss/state.hpp"

namespace nss {

/// Process exit codes shared by the CLI verbs.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,      // config parse or validation error
  kExitStepper = 2,     // step controller aborted
  kExitRootFind = 3,    // stationary bisection failure
  kExitConfinement = 4  // confinement validation failed
};

/// Builders shared by the verbs and the tests.
Grid make_grid(const RunConfig& c);
PotentialField make_potential(const RunConfig& c, const Grid& g);
SimState make_initial_state(const RunConfig& c, const Grid& g,
                            const PotentialField& pot);

/// Each verb writes its outputs into c.run.out_dir (created if missing; a
/// missing parent is a config error) and returns an ExitCode. `log` receives
/// one-line progress notes unless quiet.
int cmd_simulate(const RunConfig& c, std::ostream& log, bool quiet = false);
int cmd_stationary(const RunConfig& c, std::ostream& log, bool quiet = false);
int cmd_validate_potential(const RunConfig& c, std::ostream& log,
                           bool quiet = false);
int cmd_asymptotics(const RunConfig& c, std::ostream& log, bool quiet = false);
int cmd_sweep_delta(const RunConfig& c, std::ostream& log, bool quiet = false);

}  // namespace nss
