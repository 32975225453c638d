from setuptools import setup

setup(
    name="rbnlab",
    description="Random Boolean network simulation with entropy, LZW and BDM randomness measurements"
    " - order/chaos detection and perturbation analysis of transition diagrams.",
    author="Seita BV",
    author_email="nicolas@seita.nl",
    keywords=[
        "random boolean networks",
        "algorithmic complexity",
        "block decomposition method",
        "edge of chaos",
    ],
    version="0.1.0",
    install_requires=[
        "numpy",
        "pandas",
        "scipy",
        "statsmodels",
        "networkx",
        "pybdm",
    ],
    tests_require=["pytest"],
    packages=["rbnlab", "rbnlab.utils"],
    include_package_data=True,
    entry_points={"console_scripts": ["rbnlab=rbnlab.cli:main"]},
    classifiers=[
        "Programming Language :: Python",
        "Programming Language :: Python :: 3",
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Information Analysis",
    ],
    long_description="""\
# rbnlab

Random Boolean networks (RBNs) move from an ordered to a chaotic regime as the bias `p` of their
Boolean functions grows. `rbnlab` simulates such networks and measures how random their truth tables,
time evolution diagrams and state transition diagrams are, using three measures: Shannon entropy,
LZW compressibility and algorithmic complexity estimated by the Block Decomposition Method (BDM).

The String CTM tables behind BDM are built from first principles, by exhaustively running small
Turing machines. Matrices are measured with the 4x4 table published with pybdm.

See the Readme for usage.
""",
    long_description_content_type="text/markdown",
)
