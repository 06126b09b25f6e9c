#pragma once

namespace tlgerm {

// Every numerical threshold used by the checks and the acceptance battery. A scenario file may override any
// entry in its `tolerances` block.
struct Tolerances {
  double dissipation_floor = 1e-9;      // smallest admissible D between two germ samples
  double generation_member = 5.0;       // membership tolerance on the certification grid, in grid spacings
  double generation_dissipation = 1.0;  // slack on D >= 0 against the generators, in grid spacings
  double closed_form = 1e-8;            // hat curves vs exact piecewise-linear formulas
  double split_identity = 1e-12;        // |hat1 + hat2 - min(lambda, bar0)|
  double concave_form = 1e-3;           // hat curve of a continuous signal vs its step approximation
  double order_effect = 0.01;           // required hat1 - hat2 at bar0 / 2, relative to bar0
  double trace_membership = 1e-3;       // corrector traces vs the 1:1 germ
  double trace_pass_rate = 0.99;
  double decay_factor = 2.0;            // fitted decay constants must agree within this factor
  double fixed_point = 3.0;             // one-period drift of a corrector, in dx * domain length
  double kato_step = 1e-10;             // largest per-step increase of the L1 distance
  double homog_ratio = 0.5;             // error(eps_min) < ratio * error(eps_max)
  double homog_relative = 0.05;         // error(eps_min) < relative * |initial datum|_L1
  double transform_identity = 1e-14;    // 2:1 run vs reversed 1:2 run
  double macro_member = 1e-8;           // reconstructed macro traces vs the effective germ
  double bv_factor = 2.0;               // spread of V / R across radii and grids
  double ledger = 1e-12;                // per-step mass balance
};

}  // namespace tlgerm
