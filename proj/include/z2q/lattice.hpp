#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace z2q {

using LinkIndex = std::size_t;
using SiteIndex = std::size_t;

enum class Boundary { Open, Periodic };

/// Four links around a unit square. Orientation is irrelevant for Z2.
struct Plaquette {
  std::array<LinkIndex, 4> links;
};

/// The three links that complete a plaquette around `parent`.
struct Staple {
  std::array<LinkIndex, 3> links;
  LinkIndex parent;
  std::size_t plaquette;
};

/// D-dimensional hypercubic lattice (2 <= D <= 4).
///
/// Sites are numbered row-major in `dims` (last coordinate fastest). Links are
/// numbered lexicographically in (site, direction), skipping links that would
/// leave an open boundary. Immutable after construction.
class Lattice {
 public:
  static constexpr std::size_t kNoLink = static_cast<std::size_t>(-1);

  Lattice(std::vector<int> dims, Boundary boundary);

  std::span<const int> dims() const noexcept { return dims_; }
  std::size_t dimension() const noexcept { return dims_.size(); }
  Boundary boundary() const noexcept { return boundary_; }

  std::size_t num_sites() const noexcept { return num_sites_; }
  std::size_t num_links() const noexcept { return link_site_.size(); }
  std::size_t num_plaquettes() const noexcept { return plaquettes_.size(); }

  std::vector<int> coords(SiteIndex site) const;
  SiteIndex site_at(std::span<const int> coords) const;
  /// Neighbor of `site` one step along +mu, or kNoLink past an open edge.
  SiteIndex shift(SiteIndex site, std::size_t mu) const;

  /// Link from `site` in direction +mu, or kNoLink if absent.
  LinkIndex link(SiteIndex site, std::size_t mu) const;
  SiteIndex link_site(LinkIndex n) const { return link_site_.at(n); }
  std::size_t link_direction(LinkIndex n) const { return link_dir_.at(n); }
  /// Far endpoint of link n.
  SiteIndex link_target(LinkIndex n) const;

  std::span<const Plaquette> plaquettes() const noexcept { return plaquettes_; }
  /// Plaquettes containing link n, ascending.
  std::span<const std::size_t> plaquettes_of(LinkIndex n) const;
  /// Links touching `site` (either endpoint), ascending.
  std::span<const LinkIndex> links_at(SiteIndex site) const;

 private:
  std::vector<int> dims_;
  Boundary boundary_;
  std::size_t num_sites_ = 0;
  std::vector<std::size_t> strides_;

  std::vector<LinkIndex> site_dir_link_;  // site * D + mu -> link or kNoLink
  std::vector<SiteIndex> link_site_;
  std::vector<std::size_t> link_dir_;
  std::vector<Plaquette> plaquettes_;
  std::vector<std::vector<std::size_t>> link_plaquettes_;
  std::vector<std::vector<LinkIndex>> site_links_;
};

Lattice build_lattice(std::vector<int> dims, Boundary boundary);

/// One staple per plaquette containing link n.
std::vector<Staple> staples_of(const Lattice& lattice, LinkIndex n);

/// Spanning-tree gauge fixing. Tree links are forced to +1; the remaining
/// links are dynamical and get qubit positions in ascending link order.
class GaugeFixing {
 public:
  static constexpr std::size_t kFixed = static_cast<std::size_t>(-1);

  GaugeFixing(std::size_t num_links, std::vector<LinkIndex> fixed);

  std::size_t num_links() const noexcept { return qubit_of_.size(); }
  std::size_t num_free() const noexcept { return free_.size(); }
  std::size_t num_fixed() const noexcept { return fixed_.size(); }

  std::span<const LinkIndex> fixed() const noexcept { return fixed_; }
  std::span<const LinkIndex> free() const noexcept { return free_; }
  bool is_fixed(LinkIndex n) const { return qubit_of_.at(n) == kFixed; }
  /// Qubit position of link n, or kFixed.
  std::size_t qubit_of(LinkIndex n) const { return qubit_of_.at(n); }
  LinkIndex link_of_qubit(std::size_t q) const { return free_.at(q); }

 private:
  std::vector<LinkIndex> fixed_;
  std::vector<LinkIndex> free_;
  std::vector<std::size_t> qubit_of_;
};

/// BFS spanning tree from site 0, visiting incident links in ascending order.
GaugeFixing gauge_fix(const Lattice& lattice);

}  // namespace z2q
