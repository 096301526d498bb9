# Radar clutter information geometry - reflection coding, hyperbolic and Siegel metrics, metric k-means
