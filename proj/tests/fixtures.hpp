#pragma once

// Small codes shared by several test files.

#include "ibldpc/ldpc_code.hpp"

namespace fixture {

/// (3,6)-regular toy: all-ones 3x6 protograph lifted by Z = 8.
inline ibldpc::SparseMatrix regular36()
{
    const ibldpc::Protograph p{{{1, 1, 1, 1, 1, 1}, {1, 1, 1, 1, 1, 1}, {1, 1, 1, 1, 1, 1}}};
    return ibldpc::lift_protograph(p, ibldpc::greedy_girth_shifts(p, 8, 3), 8);
}

}  // namespace fixture
