#pragma once

#include "mgc/checks.hpp"    // IWYU pragma: export
#include "mgc/control.hpp"   // IWYU pragma: export
#include "mgc/errors.hpp"    // IWYU pragma: export
#include "mgc/inertia.hpp"   // IWYU pragma: export
#include "mgc/kindyn.hpp"    // IWYU pragma: export
#include "mgc/liegroup.hpp"  // IWYU pragma: export
#include "mgc/model.hpp"     // IWYU pragma: export
#include "mgc/model_io.hpp"  // IWYU pragma: export
#include "mgc/sim.hpp"       // IWYU pragma: export
