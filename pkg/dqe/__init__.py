#!/usr/bin/env python3

"""
DQE - Deep quality estimation of brain-tumor segmentations

Predicts an expert-style 1-6 star rating for a segmentation from center-of-mass
slices of the MR exam and the label map, and uses it to curate datasets.
"""

__version__ = '1.0.0'
