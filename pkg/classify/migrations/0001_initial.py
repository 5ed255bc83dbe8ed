# Generated by Django 5.1.1 on 2026-10-18 09:12

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="AtlasEntry",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                (
                    "family",
                    models.CharField(
                        choices=[
                            ("temperature", "PrescribedTemperature"),
                            ("flux", "PrescribedFlux"),
                            ("generic", "Generic"),
                        ],
                        db_index=True,
                        max_length=16,
                    ),
                ),
                ("m", models.FloatField(db_index=True)),
                ("gamma", models.FloatField(db_index=True)),
                (
                    "outcome",
                    models.CharField(
                        choices=[
                            ("NoSolution", "No Solution"),
                            ("Unique", "Unique"),
                            ("FiniteMultiple", "Finite Multiple"),
                            ("BandOfSolutions", "Band Of Solutions"),
                            ("Failed", "Failed"),
                        ],
                        db_index=True,
                        max_length=20,
                    ),
                ),
                ("n_solutions", models.PositiveIntegerField(default=0)),
                ("n_bounded", models.PositiveIntegerField(default=0)),
                ("n_unbounded", models.PositiveIntegerField(default=0)),
                ("band_lo", models.FloatField(blank=True, null=True)),
                ("band_hi", models.FloatField(blank=True, null=True)),
                ("records", models.JSONField(default=list)),
                ("failure", models.TextField(blank=True, null=True)),
                ("created", models.DateTimeField(auto_now_add=True)),
            ],
            options={
                "ordering": ["family", "m", "gamma"],
            },
        ),
    ]
