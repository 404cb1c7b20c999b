#pragma once

// Endpoint dispatch: one model object per design (threshold excluded) that
// answers OC queries for any c, reusing cached grids across a c-grid.

#include <variant>

#include "bayescal/binary_oc.hpp"
#include "bayescal/continuous_oc.hpp"
#include "bayescal/design_model.hpp"
#include "bayescal/tte_oc.hpp"

namespace bayescal {

class OcModel {
public:
    explicit OcModel(const DesignSpec& s) : spec_(s) {
        require_valid(s);
        switch (s.endpoint) {
            case Endpoint::continuous_single:
            case Endpoint::continuous_two_arm: impl_ = continuous_model(s); break;
            case Endpoint::tte: impl_ = tte_model(s); break;
            case Endpoint::binary_single: impl_ = binary_single_grid(s); break;
            case Endpoint::binary_two_arm: impl_ = binary_two_arm_grid(s); break;
        }
    }

    [[nodiscard]] OCResult at(double c) const {
        detail::require(c > 0.0 && c < 1.0, "threshold must lie in (0,1)");
        return std::visit([c](const auto& m) { return m.at(c); }, impl_);
    }

    [[nodiscard]] bool discrete() const noexcept { return std::holds_alternative<DecisionGrid>(impl_); }
    [[nodiscard]] const DecisionGrid* grid() const noexcept { return std::get_if<DecisionGrid>(&impl_); }
    [[nodiscard]] const NormalModel* normal() const noexcept { return std::get_if<NormalModel>(&impl_); }
    [[nodiscard]] const DesignSpec& spec() const noexcept { return spec_; }

private:
    DesignSpec spec_;
    std::variant<NormalModel, DecisionGrid> impl_;
};

/// All six metrics and gamma1 for a validated design at its own threshold.
inline OCResult evaluate(const DesignSpec& s) { return OcModel(s).at(s.rule.c); }

}  // namespace bayescal
