#ifndef LARTBHVDDATA_H
#define LARTBHVDDATA_H

#include <vector>

/**
 * High-voltage readings for one calorimeter module.
 *
 * @adl.interface ContainedObject
 * @adl.folder LArTBEvent_ADL
 */
class LArTBHVDData {
public:
  LArTBHVDData();
  ~LArTBHVDData();

private:
  int moduleNumber;
  short detectorType;
  short unit;
  int NHVch;
  std::vector<double> HVdata;
};

#endif
