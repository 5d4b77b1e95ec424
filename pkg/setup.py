from os.path import dirname, join
from setuptools import setup, find_packages

requirements_file = join(dirname(__file__), 'requirements.txt')
with open(requirements_file, 'r') as stream:
    requirements = stream.read().split('\n')
    if not requirements[-1]:
        del requirements[-1]

setup(
    name='gaussep',
    version='0.3.0',
    description="Separability, PPT and absolute separability of Gaussian "
                "states at the covariance-matrix level",
    packages=find_packages(exclude=['examples', 'examples.*']),
    python_requires=">=3.8",
    include_package_data=True,
    package_data={'gaussep': ['default_config.json']},
    entry_points={
        "console_scripts": "gaussep = gaussep:run_app",
    },
    install_requires=requirements,
    extras_require={
        'test': ['pytest'],
    },
)
