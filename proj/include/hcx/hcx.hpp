#pragma once

#include "hcx/checks.hpp"
#include "hcx/errors.hpp"
#include "hcx/expansion.hpp"
#include "hcx/expansion_high.hpp"
#include "hcx/expansion_low.hpp"
#include "hcx/expansion_mixed.hpp"
#include "hcx/fem.hpp"
#include "hcx/geometry.hpp"
#include "hcx/harmonic_basis.hpp"
#include "hcx/mesh.hpp"
#include "hcx/parallel.hpp"
#include "hcx/reference.hpp"
#include "hcx/scenario.hpp"
#include "hcx/solvers.hpp"
#include "hcx/sparse.hpp"
#include "hcx/study.hpp"
#include "hcx/subdomain.hpp"
#include "hcx/triangulate.hpp"
