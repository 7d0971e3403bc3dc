#include "z2q/lattice.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>
#include <string>

namespace z2q {

Lattice::Lattice(std::vector<int> dims, Boundary boundary)
    : dims_(std::move(dims)), boundary_(boundary) {
  const std::size_t d = dims_.size();
  if (d < 2 || d > 4) {
    throw std::invalid_argument("lattice dimension must be between 2 and 4, got " +
                                std::to_string(d));
  }
  for (int l : dims_) {
    if (l < 2) throw std::invalid_argument("every lattice extent must be >= 2");
    // L = 2 with periodic wrap would put two copies of the same plaquette on
    // one link pair.
    if (boundary_ == Boundary::Periodic && l < 3) {
      throw std::invalid_argument("periodic boundary requires every extent >= 3");
    }
  }

  strides_.assign(d, 1);
  for (std::size_t mu = d - 1; mu > 0; --mu) strides_[mu - 1] = strides_[mu] * dims_[mu];
  num_sites_ = strides_[0] * dims_[0];

  site_dir_link_.assign(num_sites_ * d, kNoLink);
  for (SiteIndex s = 0; s < num_sites_; ++s) {
    for (std::size_t mu = 0; mu < d; ++mu) {
      if (shift(s, mu) == kNoLink) continue;
      site_dir_link_[s * d + mu] = link_site_.size();
      link_site_.push_back(s);
      link_dir_.push_back(mu);
    }
  }

  link_plaquettes_.resize(num_links());
  for (SiteIndex s = 0; s < num_sites_; ++s) {
    for (std::size_t mu = 0; mu < d; ++mu) {
      for (std::size_t nu = mu + 1; nu < d; ++nu) {
        const LinkIndex a = link(s, mu);
        const LinkIndex b = link(s, nu);
        if (a == kNoLink || b == kNoLink) continue;
        const LinkIndex c = link(shift(s, mu), nu);
        const LinkIndex e = link(shift(s, nu), mu);
        if (c == kNoLink || e == kNoLink) continue;
        const std::size_t p = plaquettes_.size();
        plaquettes_.push_back({{a, c, e, b}});
        for (LinkIndex n : plaquettes_.back().links) link_plaquettes_[n].push_back(p);
      }
    }
  }

  site_links_.resize(num_sites_);
  for (LinkIndex n = 0; n < num_links(); ++n) {
    site_links_[link_site_[n]].push_back(n);
    site_links_[link_target(n)].push_back(n);
  }
  for (auto& v : site_links_) std::sort(v.begin(), v.end());
}

std::vector<int> Lattice::coords(SiteIndex site) const {
  std::vector<int> x(dims_.size());
  for (std::size_t mu = 0; mu < dims_.size(); ++mu) {
    x[mu] = static_cast<int>(site / strides_[mu]);
    site %= strides_[mu];
  }
  return x;
}

SiteIndex Lattice::site_at(std::span<const int> x) const {
  if (x.size() != dims_.size()) throw std::invalid_argument("coordinate rank mismatch");
  SiteIndex s = 0;
  for (std::size_t mu = 0; mu < dims_.size(); ++mu) {
    if (x[mu] < 0 || x[mu] >= dims_[mu]) throw std::out_of_range("coordinate outside lattice");
    s += static_cast<std::size_t>(x[mu]) * strides_[mu];
  }
  return s;
}

SiteIndex Lattice::shift(SiteIndex site, std::size_t mu) const {
  const int x = static_cast<int>((site / strides_[mu]) % dims_[mu]);
  if (x + 1 < dims_[mu]) return site + strides_[mu];
  if (boundary_ == Boundary::Open) return kNoLink;
  return site - static_cast<std::size_t>(x) * strides_[mu];
}

LinkIndex Lattice::link(SiteIndex site, std::size_t mu) const {
  if (site == kNoLink) return kNoLink;
  return site_dir_link_.at(site * dims_.size() + mu);
}

SiteIndex Lattice::link_target(LinkIndex n) const {
  return shift(link_site_.at(n), link_dir_.at(n));
}

std::span<const std::size_t> Lattice::plaquettes_of(LinkIndex n) const {
  return link_plaquettes_.at(n);
}

std::span<const LinkIndex> Lattice::links_at(SiteIndex site) const {
  return site_links_.at(site);
}

Lattice build_lattice(std::vector<int> dims, Boundary boundary) {
  return Lattice(std::move(dims), boundary);
}

std::vector<Staple> staples_of(const Lattice& lattice, LinkIndex n) {
  if (n >= lattice.num_links()) throw std::out_of_range("link index out of range");
  std::vector<Staple> out;
  for (std::size_t p : lattice.plaquettes_of(n)) {
    Staple st{{}, n, p};
    std::size_t k = 0;
    for (LinkIndex m : lattice.plaquettes()[p].links) {
      if (m != n) st.links[k++] = m;
    }
    out.push_back(st);
  }
  return out;
}

GaugeFixing::GaugeFixing(std::size_t num_links, std::vector<LinkIndex> fixed)
    : fixed_(std::move(fixed)), qubit_of_(num_links, 0) {
  std::sort(fixed_.begin(), fixed_.end());
  if (std::adjacent_find(fixed_.begin(), fixed_.end()) != fixed_.end()) {
    throw std::invalid_argument("duplicate fixed link");
  }
  for (LinkIndex n : fixed_) {
    if (n >= num_links) throw std::out_of_range("fixed link index out of range");
    qubit_of_[n] = kFixed;
  }
  for (LinkIndex n = 0; n < num_links; ++n) {
    if (qubit_of_[n] == kFixed) continue;
    qubit_of_[n] = free_.size();
    free_.push_back(n);
  }
}

GaugeFixing gauge_fix(const Lattice& lattice) {
  std::vector<bool> seen(lattice.num_sites(), false);
  std::vector<LinkIndex> tree;
  std::queue<SiteIndex> frontier;
  seen[0] = true;
  frontier.push(0);
  while (!frontier.empty()) {
    const SiteIndex s = frontier.front();
    frontier.pop();
    for (LinkIndex n : lattice.links_at(s)) {
      const SiteIndex a = lattice.link_site(n);
      const SiteIndex other = a == s ? lattice.link_target(n) : a;
      if (seen[other]) continue;
      seen[other] = true;
      tree.push_back(n);
      frontier.push(other);
    }
  }
  return GaugeFixing(lattice.num_links(), std::move(tree));
}

}  // namespace z2q
