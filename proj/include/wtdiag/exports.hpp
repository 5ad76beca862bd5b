#pragma once

#include <string>

#include "wtdiag/evaluate.hpp"

namespace wtdiag {

/// JSON record of a diagram: blocks with parent links, degrees, edges and
/// leaf sets (schema documented in the README).
std::string diagram_to_json(const Diagram& d);
std::string feynman_to_json(const FeynmanDiagram& f);

/// DOT renderings. Diagrams draw blocks as boxes and virtual vertices
/// dashed; Feynman diagrams distinguish E_D (thick) from E_L (thin) edges;
/// the umbrella/cycle view shows dashed block edges and cycle orientation.
std::string diagram_to_dot(const Diagram& d);
std::string feynman_to_dot(const FeynmanDiagram& f);
std::string umbrella_to_dot(const FeynmanDiagram& f);
std::string cycle_to_dot(const FeynmanDiagram& f, const HamiltonCycle& c);

std::string estimate_to_json(const IntegralEstimate& e, const std::string& extra_meta = "");

/// CSV row set for a sweep: nu, |J|, re, im, stderr columns plus a fit
/// footer comment.
std::string sweep_to_csv(const SweepResult& r);

/// CSV dump of the phase-algebra classification of a diagram family.
std::string classification_to_csv(int m, int n, int d);

void write_file(const std::string& path, const std::string& content);

}  // namespace wtdiag
