#pragma once

#include "xdr/core/types.hpp"
#include "xdr/encoder/encoder.hpp"

#include <span>

namespace xdr::encoder {

/// One momentum-encoder embedding per record of a domain, row = record id.
struct FullFeatureTable {
  DomainId domain = 0;
  Matrix rows;
  int epoch = 0;

  bool operator==(const FullFeatureTable& o) const {
    return domain == o.domain && epoch == o.epoch && rows.rows() == o.rows.rows() && rows.cols() == o.rows.cols() &&
           rows == o.rows;
  }
};

/// Requires dense record ids 0..n-1 in order.
FullFeatureTable refresh_feature_table(const Encoder& net, std::span<const ImageRecord> records, int epoch);
inline FullFeatureTable refresh_feature_table(const MomentumEncoder& menc, std::span<const ImageRecord> records,
                                              int epoch) {
  return refresh_feature_table(menc.net, records, epoch);
}

}  // namespace xdr::encoder
