#pragma once
//
// Umbrella header: block-compressed SVD storage for multivariate time
// series with arbitrary-range SVD queries.
//

#include <rangesvd/analysis.hpp>
#include <rangesvd/commands.hpp>
#include <rangesvd/csv.hpp>
#include <rangesvd/errors.hpp>
#include <rangesvd/matrix.hpp>
#include <rangesvd/query.hpp>
#include <rangesvd/serialize.hpp>
#include <rangesvd/store.hpp>
#include <rangesvd/svd.hpp>
