#pragma once

// End-to-end certification of one observation set: lambda*, gamma* with the
// tie-broken P, and the probabilistic JSR bound.

#include "jsrcert/bounds.hpp"
#include "jsrcert/certifier.hpp"
#include "jsrcert/sampling.hpp"

namespace jsrcert {

struct CertifyRequest {
  int degree = 1;
  double beta = 0.95;
  double beta1 = 0.95;
  int modes_upper = 0;  // m, required
  SolveOptions solve;
};

struct CertifyResult {
  CertificateReport report;
  GammaSolution solution;
};

/// Only the endpoint view of `obs` reaches the solvers.
CertifyResult certify(const ObservationSet& obs, const CertifyRequest& request);
CertifyResult certify(const EndpointSet& obs, const CertifyRequest& request, const Provenance& provenance = {});

}  // namespace jsrcert
