#pragma once

#include "aop/error.hpp"
#include "aop/raster.hpp"
#include "aop/rng.hpp"

#include <gtest/gtest.h>

#include <cstdint>
#include <string>

// Expects `stmt` to throw aop::Error with the given code.
#define EXPECT_AOP_ERROR(stmt, expected_code)                                        \
    do {                                                                             \
        try {                                                                        \
            (void)(stmt);                                                            \
            ADD_FAILURE() << "no aop::Error thrown by " #stmt;                       \
        } catch (const ::aop::Error& e_) {                                           \
            EXPECT_EQ(e_.code(), (expected_code)) << e_.what();                      \
        }                                                                            \
    } while (0)

namespace testutil {

inline aop::LabelMask random_labels(aop::SplitMix64& rng, int h, int w) {
    std::vector<std::uint8_t> v(static_cast<std::size_t>(h) * w);
    for (auto& x : v) x = static_cast<std::uint8_t>(rng.next() % 3);
    return aop::LabelMask(h, w, v);
}

inline std::vector<std::uint8_t> bytes(const std::string& s) { return {s.begin(), s.end()}; }

}  // namespace testutil
