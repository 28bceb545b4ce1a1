#pragma once

#include <string>
#include <vector>

#include "pdelearn/hybrid.hpp"
#include "pdelearn/pblock.hpp"
#include "pdelearn/series.hpp"

namespace pdelearn {

enum class RenderStyle { Unicode, Ascii, Latex };

struct RankedTerm {
  TermSpec spec;
  double coefficient = 0.0;
  double mean_contribution = 0.0;  // mean over samples of |coefficient * term value|
};

/// Discovered equation ready for printing: terms sorted by descending mean
/// contribution, truncated to `truncation` entries when rendered.
struct EquationDoc {
  int lhs_order = 1;
  std::vector<RankedTerm> terms;
  int truncation = 4;
  double dominant_weight = -1.0;  // hybrid only: the rendered component's eps
  std::vector<std::string> channel_names;  // target name then covariates
};

/// Sorts by mean |coefficient * value| descending, stable on ties;
/// zero-coefficient terms are dropped before ranking.
std::vector<RankedTerm> rank_terms(
    const std::vector<std::pair<TermSpec, double>>& terms,
    const std::vector<std::vector<double>>& term_values);

/// Contribution means are taken over the supplied series (callers pass the
/// validation split so rankings do not reward fitting artifacts).
EquationDoc build_equation_doc(const PBlock& block, const TimeSeries& series, int truncation = 4);

/// Renders the most weighted component and records its eps.
EquationDoc build_equation_doc(const HybridPde& hybrid, const TimeSeries& series,
                               int truncation = 4);

std::string term_symbol(const TermSpec& spec, const std::vector<std::string>& channel_names,
                        RenderStyle style);

std::string render_equation(const EquationDoc& doc, int precision, RenderStyle style);

}  // namespace pdelearn
