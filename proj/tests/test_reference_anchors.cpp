// SPDX-License-Identifier: Apache-2.0
// Reference values that this implementation does not reproduce.
// Kept as a separate executable so the failures stay visible.
#include <gtest/gtest.h>

#include <mmwbf/codebook.hpp>
#include <mmwbf/linkbudget.hpp>

using namespace mmwbf;

TEST(ReferenceAnchor, SixteenBeamSubcodebookOptimum)
{
    const auto d = design_subcodebook(ArrayGeometry::ula(32), 16, 5);
    RecordProperty("n_subarrays", d.codebook.n_subarrays);
    RecordProperty("spoil_deg", std::to_string(rad2deg(d.codebook.spoil_angle)));
    RecordProperty("chi", std::to_string(d.chi));
    EXPECT_EQ(d.codebook.n_subarrays, 2);
    EXPECT_NEAR(rad2deg(d.codebook.spoil_angle), 1.72, 0.02);
}

TEST(ReferenceAnchor, RequiredGainAtHundredMetres)
{
    const double g = required_gain(100.0, LinkBudget{});
    RecordProperty("required_gain_db", std::to_string(g));
    EXPECT_NEAR(g, 29.0, 4.0);
}
