#include "momentum.hpp"
#include "nssl/error.hpp"
#include "nssl/ins3d.hpp"
#include "nssl/spectral.hpp"

namespace nssl {

ForcingBreakdown assemble_forcing(const PerturbationState& state, Background& bg,
                                  const SpectralField& w_t_guess, bool dealias_products) {
  const Grid& g = state.w.grid();
  if (!(g == bg.grid3d())) throw ConfigError("assemble_forcing: grid differs from the background's");
  const BackgroundSamples b = bg.samples(state.step);
  const SpectralField wd = dealias_products ? dealias(state.w) : state.w;
  const PhysicalField w = inverse(wd);
  const PhysicalField gw = inverse(gradient_tensor(wd));
  const PhysicalField wt = detail::to_physical(w_t_guess, dealias_products);
  auto h = state.h.component(0);

  ForcingBreakdown out{PhysicalField(g, 3), std::vector<PhysicalField>(6, PhysicalField(g, 3)),
                       PhysicalField(g, 3)};
  const std::size_t n = g.size();
  const std::size_t n2 = g.dim(2);
  for (std::size_t p = 0; p < n; ++p) {
    const std::size_t q = p / n2;
    const double rho = 1.0 + h[p];
    for (int i = 0; i < 3; ++i) {
      double bgw = 0.0, wgw = 0.0;
      for (int j = 0; j < 3; ++j) {
        const double d = gw.component(3 * i + j)[p];
        bgw += b.v.component(j)[q] * d;
        wgw += w.component(j)[p] * d;
      }
      const double wgv = w.component(0)[p] * b.grad.component(2 * i)[q] +
                         w.component(1)[p] * b.grad.component(2 * i + 1)[q];
      const double vt = b.vt.component(i)[q], adv2d = b.adv.component(i)[q];
      const double wti = wt.component(i)[p];
      out.parts[0].component(i)[p] = rho * bgw;
      out.parts[1].component(i)[p] = rho * wgw;
      out.parts[2].component(i)[p] = h[p] * vt;
      out.parts[3].component(i)[p] = h[p] * wti;
      out.parts[4].component(i)[p] = rho * wgv;
      out.parts[5].component(i)[p] = h[p] * adv2d;
      out.advection.component(i)[p] = bgw + wgw;
      out.total.component(i)[p] =
          -h[p] * vt - h[p] * wti - h[p] * (bgw + wgw) - rho * wgv - h[p] * adv2d;
    }
  }
  if (dealias_products) {
    auto trunc = [](PhysicalField& f) { f = inverse(dealias(forward(f))); };
    trunc(out.total);
    trunc(out.advection);
    for (auto& f : out.parts) trunc(f);
  }
  return out;
}

}  // namespace nssl
