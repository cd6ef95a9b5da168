#pragma once

#include <optional>
#include <string>

#include "gibbsperc/contour.hpp"
#include "gibbsperc/geometry.hpp"

namespace gibbsperc::cli {

/// Everything drawn in a planar scene. Optional parts are skipped when unset.
struct Scene {
  Configuration config;
  /// Boolean-model radius; discs of this radius form the grey region.
  double R = 0.0;
  /// Radius of the thin circles around each point.
  std::optional<double> r;
  std::optional<CubeLattice> lattice;
  CubeSet chain;
  std::optional<Point> from;
  std::optional<Point> to;
  double pixels = 600.0;
};

/// SVG document for the scene, clipped to the window. Elements carry the
/// classes zr-disc, point, r-circle, grid, chain-cube and endpoint. Layout
/// depends only on the scene, so equal scenes give equal bytes.
std::string render_svg(const Scene& scene);

/// Cube centres inside the window and outside Z_R, scanned column by column:
/// the earliest one joined to some other by a separating chain, paired with
/// the latest such partner.
struct ChainEndpoints {
  Point from;
  Point to;
  CubeSet chain;
};
std::optional<ChainEndpoints> find_chain(const BooleanModel& bm, const CubeLattice& lattice,
                                         double r);

}  // namespace gibbsperc::cli
