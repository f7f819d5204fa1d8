from setuptools import setup, find_packages

from qcalc.version import VERSION

setup(
    name="qcalc",
    version=VERSION,
    description="Rubin's q-derivative calculus and second-order linear q-difference equations, with a CLI and an MCP server",
    packages=find_packages(exclude=["tests", "tests.*"]),
    include_package_data=True,
    install_requires=[
        "numpy>=1.26",
        "pydantic>=2.9",
        "rich>=13.4.0",
        "mcp>=1.6.0,<2",
    ],
    extras_require={
        "test": [
            "pytest>=8.0",
            "hypothesis>=6.100",
        ],
    },
    entry_points={
        "console_scripts": [
            "qcalc=qcalc.cli:main",
            "qcalc-mcp=qcalc.mcp_server:main",
        ],
    },
    python_requires=">=3.10",
    classifiers=[
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.10",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
)
