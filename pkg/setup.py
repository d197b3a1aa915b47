from setuptools import setup, find_packages

packages = find_packages('.', include=['mhd_ensemble', 'mhd_ensemble.*'])
print('packages are: {}'.format(packages))

setup(
    name="mhd-ensemble",
    version='v1.0.0',
    packages=packages,
    include_package_data=True,
    python_requires='>=3.8',
    install_requires=[
        'numpy',
        'scipy',
        'PyYAML',
        'vtk',
    ],
    extras_require={
        'test': ['pytest'],
    },
    entry_points={
        'console_scripts': [
            'mhd-ensemble=mhd_ensemble.io_cli.cli:main',
        ],
    },
)
