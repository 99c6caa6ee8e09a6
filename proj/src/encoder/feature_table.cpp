#include "xdr/encoder/feature_table.hpp"

#include "xdr/core/errors.hpp"

namespace xdr::encoder {

FullFeatureTable refresh_feature_table(const Encoder& net, std::span<const ImageRecord> records, int epoch) {
  FullFeatureTable table;
  table.domain = records.empty() ? 0 : records.front().domain;
  table.epoch = epoch;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].id != static_cast<RecordId>(i)) throw ValidationError("record ids must be dense and ordered");
    if (records[i].domain != table.domain) throw ValidationError("feature table records span several domains");
  }
  table.rows = net.encode_all(records);
  return table;
}

}  // namespace xdr::encoder
