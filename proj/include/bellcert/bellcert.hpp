#pragma once

// Certification of Bell correlations in permutationally invariant many-body
// statistics: a convergent hierarchy of semidefinite relaxations of the
// symmetrized local polytope, a brute-force polytope oracle for ground truth,
// and extraction of the certifying Bell inequality from the SDP dual.

#include "bellcert/certify.hpp"
#include "bellcert/moment.hpp"
#include "bellcert/polynomial.hpp"
#include "bellcert/polytope.hpp"
#include "bellcert/quotient.hpp"
#include "bellcert/rational.hpp"
#include "bellcert/scenario.hpp"
#include "bellcert/sdp.hpp"
#include "bellcert/sdpa_io.hpp"
#include "bellcert/simplex.hpp"
