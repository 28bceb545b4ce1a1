#include "pdelearn/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "pdelearn/errors.hpp"

namespace pdelearn {

std::vector<RankedTerm> rank_terms(const std::vector<std::pair<TermSpec, double>>& terms,
                                   const std::vector<std::vector<double>>& term_values) {
  if (terms.size() != term_values.size()) fail(ErrorKind::Shape, "terms/values mismatch");
  std::vector<RankedTerm> ranked;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i].second == 0.0) continue;
    if (term_values[i].empty()) fail(ErrorKind::Shape, "term value series must be non-empty");
    double acc = 0.0;
    for (double v : term_values[i]) acc += std::fabs(terms[i].second * v);
    ranked.push_back({terms[i].first, terms[i].second,
                      acc / static_cast<double>(term_values[i].size())});
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const RankedTerm& a, const RankedTerm& b) {
    return a.mean_contribution > b.mean_contribution;
  });
  return ranked;
}

EquationDoc build_equation_doc(const PBlock& block, const TimeSeries& series, int truncation) {
  if (!block.trained()) fail(ErrorKind::NotTrained, "model has not been trained");
  series.validate();
  if (series.covariate_count() != block.covariate_count()) {
    fail(ErrorKind::Schema, "series covariate count does not match the model");
  }

  const CandidateMatrix cm = block.candidate_matrix(series);
  std::vector<std::pair<TermSpec, double>> terms;
  std::vector<std::vector<double>> values;
  const auto& specs = block.term_specs();
  for (std::size_t c = 0; c < specs.size(); ++c) {
    terms.emplace_back(specs[c], block.output_weights()[c]);
    std::vector<double> col(cm.values.rows());
    for (std::size_t r = 0; r < cm.values.rows(); ++r) col[r] = cm.values(r, c);
    values.push_back(std::move(col));
  }
  if (block.bias() != 0.0) {
    TermSpec constant;
    terms.emplace_back(constant, block.bias());
    values.emplace_back(cm.values.rows(), 1.0);
  }

  EquationDoc doc;
  doc.lhs_order = block.lhs_order();
  doc.truncation = truncation;
  doc.terms = rank_terms(terms, values);
  doc.channel_names = series.names;
  return doc;
}

EquationDoc build_equation_doc(const HybridPde& hybrid, const TimeSeries& series, int truncation) {
  const std::size_t dominant = hybrid.dominant_component();
  EquationDoc doc = build_equation_doc(hybrid.components()[dominant], series, truncation);
  doc.dominant_weight = hybrid.weights()[dominant];
  return doc;
}

namespace {

std::string target_name(const std::vector<std::string>& names) {
  return names.empty() ? "y" : names[0];
}

std::string covariate_name(const std::vector<std::string>& names, int index) {
  const std::size_t i = static_cast<std::size_t>(index) + 1;
  if (i < names.size()) return names[i];
  return "x" + std::to_string(index + 1);
}

std::string super(int order) {
  switch (order) {
    case 2: return "²";
    case 3: return "³";
    default: return "^" + std::to_string(order);
  }
}

std::string derivative_symbol(const std::string& num, const std::string& den, int order,
                              RenderStyle style) {
  switch (style) {
    case RenderStyle::Unicode:
      if (order == 1) return "∂" + num + "/∂" + den;
      return "∂" + super(order) + num + "/∂" + den + super(order);
    case RenderStyle::Ascii:
      if (order == 1) return "d" + num + "/d" + den;
      if (den == "t") {  // dNy/dtN, the terminal-friendly LHS form
        return "d" + std::to_string(order) + num + "/d" + den + std::to_string(order);
      }
      return "d" + std::to_string(order) + num + "/d" + den + "^" + std::to_string(order);
    case RenderStyle::Latex:
      if (order == 1) return "\\frac{\\partial " + num + "}{\\partial " + den + "}";
      return "\\frac{\\partial^" + std::to_string(order) + " " + num + "}{\\partial " + den +
             "^" + std::to_string(order) + "}";
  }
  return "";
}

}  // namespace

std::string term_symbol(const TermSpec& spec, const std::vector<std::string>& channel_names,
                        RenderStyle style) {
  std::vector<std::string> parts;
  for (const auto& f : spec.factors) {
    switch (f.kind) {
      case TermFactor::Kind::DerivativeRatio:
        parts.push_back(derivative_symbol(target_name(channel_names),
                                          covariate_name(channel_names, f.covariate), f.order,
                                          style));
        break;
      case TermFactor::Kind::RawTarget:
        parts.push_back(target_name(channel_names));
        break;
      case TermFactor::Kind::RawCovariate:
        parts.push_back(covariate_name(channel_names, f.covariate));
        break;
    }
  }
  if (spec.time_gate) parts.push_back("t");
  if (parts.empty()) return "1";
  std::string joined = parts[0];
  const char* dot = (style == RenderStyle::Latex) ? " \\cdot " : "·";
  if (style == RenderStyle::Ascii) dot = "*";
  for (std::size_t i = 1; i < parts.size(); ++i) joined += std::string(dot) + parts[i];
  return joined;
}

std::string render_equation(const EquationDoc& doc, int precision, RenderStyle style) {
  const std::string y = target_name(doc.channel_names);
  std::string lhs;
  if (doc.lhs_order == 1) {
    lhs = derivative_symbol(y, "t", 1, style);
  } else {
    lhs = derivative_symbol(y, "t", 2, style);
  }

  char buf[64];
  auto coef_str = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    return std::string(buf);
  };

  std::ostringstream out;
  out << lhs << " = ";
  if (doc.terms.empty()) {
    out << coef_str(0.0);
  } else {
    const int shown = std::min<int>(doc.truncation, static_cast<int>(doc.terms.size()));
    for (int i = 0; i < shown; ++i) {
      const RankedTerm& term = doc.terms[static_cast<std::size_t>(i)];
      const std::string symbol = term_symbol(term.spec, doc.channel_names, style);
      if (i == 0) {
        out << coef_str(term.coefficient);
      } else {
        out << (term.coefficient < 0 ? " - " : " + ") << coef_str(std::fabs(term.coefficient));
      }
      if (symbol != "1") {
        out << (style == RenderStyle::Latex ? " " : (style == RenderStyle::Ascii ? "*" : "·"))
            << symbol;
      }
    }
  }
  if (doc.dominant_weight >= 0.0) {
    out << "   [" << (style == RenderStyle::Latex ? "\\epsilon" : "ε") << " = "
        << coef_str(doc.dominant_weight) << "]";
  }
  return out.str();
}

}  // namespace pdelearn
