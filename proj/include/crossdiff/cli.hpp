#ifndef CROSSDIFF_CLI_HPP
#define CROSSDIFF_CLI_HPP

namespace crossdiff {

/** Command-line entry point.  Exit codes: 0 on success, 2 when a run
 *  violates a checked invariant or the model fails admissibility, 1 for
 *  configuration, usage or solver errors.
 */
int cli_main(int argc, char** argv);

}  // namespace crossdiff

#endif
