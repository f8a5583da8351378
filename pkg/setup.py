from setuptools import setup, find_packages

with open("requirements.txt") as f:
    install_requires = f.read().strip().split("\n")

# get version from __version__ variable in decide_interference/__init__.py
from decide_interference import __version__ as version
from decide_interference.config.defaults import app_description, app_license, app_name, app_publisher

setup(
    name=app_name,
    version=version,
    description=app_description,
    author=app_publisher,
    license=app_license,
    packages=find_packages(),
    zip_safe=False,
    include_package_data=True,
    install_requires=install_requires,
    python_requires=">=3.10",
    extras_require={"test": ["pytest"]},
    entry_points={"console_scripts": ["decide-sim = decide_interference.cli:main"]},
)
