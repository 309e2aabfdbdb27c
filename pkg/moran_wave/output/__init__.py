"""
Output emitters: CSV tables, SVG plot, run manifests and reports
"""
